"""Query-time orchestration: probe, map columns, consolidate, rank."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Sequence

from .answer import AnswerTable, consolidate, rank_rows
from .harvest import WebTable
from .index import STAGE1_K, STAGE2_THRESHOLD, Index, two_stage_retrieve
from .infer import infer, relevance_probabilities
from .labels import NR, Labeling
from .model import FeatureSet, Model, ModelWeights, build_model, compute_features
from .text import tokenize


def parse_columns(spec: str | Sequence[str]) -> list[str]:
    """``"a|b|c"`` or a list of column strings."""
    cols = spec.split("|") if isinstance(spec, str) else list(spec)
    cols = [c.strip() for c in cols]
    if not cols or any(not tokenize(c) for c in cols):
        raise ValueError(f"bad column query {spec!r}")
    return cols


def features_for(index: Index, columns: Sequence[str], tables: Sequence[WebTable], weights: ModelWeights) -> FeatureSet:
    return compute_features(
        [tokenize(c) for c in columns],
        tables,
        index.tfidf_weight,
        reliability=weights.reliability,
        index=index if weights.use_pmi2 else None,
        lam=weights.lam,
        floor=weights.nsim_floor,
    )


@dataclass
class QueryResult:
    columns: list[str]
    tables: list[WebTable]
    labeling: Labeling
    answer: AnswerTable
    model: Model | None
    timings: dict[str, float] = field(default_factory=dict)


class _Timer(dict):
    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self[name] = self.get(name, 0.0) + time.perf_counter() - t0


def run_query(
    index: Index | None,
    columns: Sequence[str],
    weights: ModelWeights = ModelWeights(),
    *,
    algo: str = "table-centric",
    seed: int = 0,
    top_k: int = STAGE1_K,
    stage2: bool = True,
) -> QueryResult:
    columns = parse_columns(columns)
    timer = _Timer()
    if index is None or len(index) == 0:
        return QueryResult(columns, [], {}, AnswerTable(columns), None, {})
    query = [tokenize(c) for c in columns]

    def mapper(tables: list[WebTable]) -> dict[str, float]:
        model = build_model(features_for(index, columns, tables, weights), weights)
        labels = infer(model, "independent")
        probs = relevance_probabilities(model)
        return {tid: p if any(l != NR for l in labels[tid]) else 0.0 for tid, p in probs.items()}

    with timer.stage("probe"):
        tables = two_stage_retrieve(
            index, query, mapper if stage2 else None, k=top_k, seed=seed, threshold=STAGE2_THRESHOLD
        )
    if not tables:
        return QueryResult(columns, [], {}, AnswerTable(columns), None, dict(timer))
    with timer.stage("read_parse"):
        fs = features_for(index, columns, tables, weights)
    with timer.stage("column_map"):
        model = build_model(fs, weights)
        labeling = infer(model, algo)
    with timer.stage("consolidate"):
        relevance = relevance_probabilities(model)
        answer = rank_rows(consolidate(tables, labeling, columns), relevance)
    return QueryResult(columns, tables, labeling, answer, model, dict(timer))
