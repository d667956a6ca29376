"""The column-mapping graphical model.

One variable per (table, column) with labels ``1..q``, ``NA`` and ``NR``;
node potentials from the scoring features, gated cross-table edge
potentials on max-matched column pairs, and four hard per-table
constraints (mutex, all-irrelevant, must-match, min-match).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import score
from .flow import max_weight_matching
from .harvest import WebTable
from .labels import NA, NR, Labeling, label_index
from .score import ColumnFeatures, Reliability

WEIGHT_NAMES = ("w1", "w2", "w3", "w4", "w5", "w_e")


@dataclass(frozen=True)
class ModelWeights:
    w1: float = 1.0
    w2: float = 0.5
    w3: float = 0.25
    w4: float = 1.0
    w5: float = -0.15
    w_e: float = 0.5
    lam: float = 0.3
    nsim_floor: float = 0.1
    conf_threshold: float = 0.6
    min_match: int | None = None
    reliability: Reliability = field(default_factory=Reliability)
    use_pmi2: bool = False

    def __post_init__(self):
        for name in ("w1", "w2", "w3", "w4", "w_e"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    def m(self, q: int) -> int:
        """Minimum number of mapped columns in a relevant table."""
        if self.min_match is not None:
            return self.min_match
        return 2 if q >= 2 else 1

    def vector(self) -> tuple[float, ...]:
        return tuple(getattr(self, n) for n in WEIGHT_NAMES)

    def to_json(self) -> dict:
        d = asdict(self)
        d["reliability"] = asdict(self.reliability)
        return d

    @classmethod
    def from_json(cls, d: Mapping) -> "ModelWeights":
        known = {f for f in cls.__dataclass_fields__}
        d = {k: v for k, v in d.items() if not k.startswith("_")}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if "reliability" in d:
            d["reliability"] = Reliability(**d["reliability"])
        return cls(**d)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "ModelWeights":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed config {path}: {exc}") from exc
        return cls.from_json(data)


@dataclass
class Edge:
    """Cross-table edge between columns ``a`` and ``b``, each ``(table index, column)``."""

    a: tuple[int, int]
    b: tuple[int, int]
    nsim_ab: float
    nsim_ba: float
    gate_a: bool = False
    gate_b: bool = False
    weight: float = 0.0

    def strength(self) -> float:
        """Reward for a shared non-nr label, before multiplying by w_e."""
        return self.nsim_ab * self.gate_b + self.nsim_ba * self.gate_a


def edge_potential(edge: Edge, la: int, lb: int, w_e: float) -> float:
    if la != lb or la == NR:
        return 0.0
    return w_e * edge.strength()


@dataclass
class Model:
    """Potentials over every candidate column; ``theta[i]`` is n_t x (q+2)."""

    q: int
    m: int
    table_ids: list[str]
    theta: list[np.ndarray]
    edges: list[Edge] = field(default_factory=list)
    w_e: float = 0.0

    def __post_init__(self):
        for th in self.theta:
            if th.ndim != 2 or th.shape[1] != self.q + 2:
                raise ValueError("theta arrays must be n_t x (q+2)")

    def n_cols(self, i: int) -> int:
        return self.theta[i].shape[0]

    @property
    def n_variables(self) -> int:
        return sum(th.shape[0] for th in self.theta)

    def table_index(self) -> dict[str, int]:
        return {tid: i for i, tid in enumerate(self.table_ids)}

    def without_edges(self) -> "Model":
        return replace(self, edges=[])


def node_potential(feat: ColumnFeatures, c: int, label: int, weights: ModelWeights, q: int) -> float:
    if label == NA:
        return 0.0
    if label == NR:
        return weights.w4 * min(q, feat.n_t) / feat.n_t * (1.0 - feat.relevance)
    l = label - 1
    val = weights.w1 * feat.seg[c][l] + weights.w2 * feat.cover[c][l] + weights.w5
    if weights.use_pmi2:
        val += weights.w3 * feat.pmi[c][l]
    return val


def theta_matrix(feat: ColumnFeatures, weights: ModelWeights, q: int) -> np.ndarray:
    th = np.zeros((feat.n_t, q + 2))
    for c in range(feat.n_t):
        for j in range(q + 2):
            label = j + 1 if j < q else (NA if j == q else NR)
            th[c, j] = node_potential(feat, c, label, weights, q)
    return th


def normalized_sim(
    sims: Mapping[tuple, float], lam: float = 0.3, floor: float = 0.1
) -> dict[tuple, float]:
    """Per-source normalization: nsim(a, b) = sim(a, b) / (lam + sum of sim(a, .)).

    ``sims`` maps ordered pairs ``(a, b)`` to raw similarity; pairs below
    ``floor`` are dropped before normalizing.
    """
    totals: dict = {}
    for (a, _), s in sims.items():
        if s >= floor:
            totals[a] = totals.get(a, 0.0) + s
    return {(a, b): s / (lam + totals[a]) for (a, b), s in sims.items() if s >= floor}


def check_constraints(labels: Sequence[int], q: int, m: int) -> bool:
    """Mutex, all-irrelevant, must-match and min-match for one table."""
    return _mutex_all_irr(labels, q) and _must_min(labels, m)


def _mutex_all_irr(labels: Sequence[int], q: int) -> bool:
    mapped = [l for l in labels if l >= 1]
    if len(mapped) != len(set(mapped)) or any(l > q for l in mapped):
        return False
    n_nr = sum(1 for l in labels if l == NR)
    return n_nr in (0, len(labels))


def _must_min(labels: Sequence[int], m: int) -> bool:
    if all(l == NR for l in labels):
        return True
    return 1 in labels and sum(1 for l in labels if l >= 1) >= m


def table_score(theta: np.ndarray, labels: Sequence[int], q: int) -> float:
    return float(sum(theta[c, label_index(l, q)] for c, l in enumerate(labels)))


def objective(model: Model, y: Labeling, *, relaxed: bool = False) -> float:
    """Node plus edge potentials; -inf if a table breaks a constraint.

    With ``relaxed`` only mutex and all-irrelevant are enforced. Each edge
    counts once since its potential already sums both directions.
    """
    total = 0.0
    rows = []
    for i, tid in enumerate(model.table_ids):
        labels = tuple(y[tid])
        if len(labels) != model.n_cols(i):
            raise ValueError(f"labeling of {tid} has {len(labels)} columns, expected {model.n_cols(i)}")
        ok = _mutex_all_irr(labels, model.q) and (relaxed or _must_min(labels, model.m))
        if not ok:
            return -math.inf
        total += table_score(model.theta[i], labels, model.q)
        rows.append(labels)
    for e in model.edges:
        total += edge_potential(e, rows[e.a[0]][e.a[1]], rows[e.b[0]][e.b[1]], model.w_e)
    return total


# --- assembly from harvested tables ------------------------------------------


@dataclass
class ColumnPair:
    a: tuple[int, int]
    b: tuple[int, int]
    weight: float
    nsim_ab: float
    nsim_ba: float


@dataclass
class FeatureSet:
    """Everything about a query and its candidate tables that does not depend on weights."""

    query: list[list[str]]
    tables: list[WebTable]
    features: list[ColumnFeatures]
    pairs: list[ColumnPair]

    @property
    def table_ids(self) -> list[str]:
        return [t.id for t in self.tables]


def match_columns(sim: np.ndarray, header: np.ndarray) -> list[tuple[int, int, float]]:
    """One-one column matching of a table pair on 0.5 content + 0.5 header similarity."""
    w = 0.5 * sim + 0.5 * header
    res = max_weight_matching(w)
    return [(i, j, float(w[i, j])) for i, j, _ in sorted(res.pairs)]


def compute_features(
    query: Sequence[Sequence[str]],
    tables: Sequence[WebTable],
    ti,
    *,
    reliability: Reliability = Reliability(),
    index=None,
    lam: float = 0.3,
    floor: float = 0.1,
) -> FeatureSet:
    query = [list(col) for col in query]
    if not query or any(not col for col in query):
        raise ValueError("every query column needs at least one token")
    tables = list(tables)
    feats = [score.table_features(query, t, ti, reliability, index) for t in tables]

    values = [[score.value_set(t, c) for c in range(t.n_t)] for t in tables]
    headers = [[score.header_tokens(t, c) for c in range(t.n_t)] for t in tables]
    raw: dict[tuple, float] = {}
    matched: list[tuple[tuple[int, int], tuple[int, int], float]] = []
    for i, j in itertools.combinations(range(len(tables)), 2):
        sim = np.zeros((tables[i].n_t, tables[j].n_t))
        hdr = np.zeros_like(sim)
        for c in range(tables[i].n_t):
            for d in range(tables[j].n_t):
                hdr[c, d] = score.in_sim(headers[i][c], headers[j][d], ti)
                sim[c, d] = 0.8 * score.jaccard(values[i][c], values[j][d]) + 0.2 * hdr[c, d]
                raw[(i, c), (j, d)] = raw[(j, d), (i, c)] = float(sim[c, d])
        for c, d, w in match_columns(sim, hdr):
            if w >= floor:
                matched.append(((i, c), (j, d), w))
    nsim = normalized_sim(raw, lam, floor)
    pairs = [ColumnPair(a, b, w, nsim.get((a, b), 0.0), nsim.get((b, a), 0.0)) for a, b, w in matched]
    return FeatureSet(query, tables, feats, pairs)


def build_edges(
    pairs: Iterable[ColumnPair], confidences: Sequence[np.ndarray], q: int, threshold: float = 0.6
) -> list[Edge]:
    """Edges on matched column pairs with confidence gates.

    An endpoint's gate opens when its largest non-nr label probability
    exceeds ``threshold``. ``confidences[i]`` is n_t x (q+2).
    """

    def gate(node: tuple[int, int]) -> bool:
        p = confidences[node[0]][node[1]]
        return bool(np.max(p[: q + 1]) > threshold)

    return [Edge(p.a, p.b, p.nsim_ab, p.nsim_ba, gate(p.a), gate(p.b), p.weight) for p in pairs]


def build_model(fs: FeatureSet, weights: ModelWeights) -> Model:
    from .infer import column_confidences

    q = len(fs.query)
    theta = [theta_matrix(f, weights, q) for f in fs.features]
    model = Model(q, weights.m(q), fs.table_ids, theta, [], weights.w_e)
    conf = column_confidences(model)
    model.edges = build_edges(fs.pairs, conf, q, weights.conf_threshold)
    return model


# --- weight tuning -------------------------------------------------------------


def grid_points(grid: Mapping[str, Sequence[float]], base: ModelWeights) -> list[ModelWeights]:
    unknown = set(grid) - set(WEIGHT_NAMES)
    if unknown:
        raise ValueError(f"unknown grid keys: {sorted(unknown)}")
    axes = [list(grid.get(n, [getattr(base, n)])) for n in WEIGHT_NAMES]
    if not grid or any(not a for a in axes):
        raise ValueError("empty weight grid")
    return [replace(base, **dict(zip(WEIGHT_NAMES, combo))) for combo in itertools.product(*axes)]


def mean_error(
    train: Sequence[tuple[FeatureSet, Labeling]], weights: ModelWeights, algo: str
) -> float:
    from .answer import f1_error
    from .infer import infer

    errs = [f1_error(infer(build_model(fs, weights), algo), gold) for fs, gold in train]
    return float(np.mean(errs))


def search_grid(
    train: Sequence[tuple[FeatureSet, Labeling]],
    grid: Mapping[str, Sequence[float]],
    algo: str = "table-centric",
    base: ModelWeights = ModelWeights(),
) -> list[tuple[ModelWeights, float]]:
    """Mean F1 error of every grid point, in grid order."""
    if not train:
        raise ValueError("empty training set")
    return [(w, mean_error(train, w, algo)) for w in grid_points(grid, base)]


def grid_search_weights(
    train: Sequence[tuple[FeatureSet, Labeling]],
    grid: Mapping[str, Sequence[float]],
    algo: str = "table-centric",
    base: ModelWeights = ModelWeights(),
) -> ModelWeights:
    """Exhaustive search; lowest error wins, ties go to the lexicographically smallest weights."""
    results = search_grid(train, grid, algo, base)
    return min(results, key=lambda r: (r[1], r[0].vector()))[0]
