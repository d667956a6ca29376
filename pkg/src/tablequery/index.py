"""Three-field inverted index over WebTables with boosted TF-IDF probing."""

from __future__ import annotations

import json
import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .harvest import WebTable
from .text import tokenize

FIELDS = ("header", "context", "content")
BOOSTS = {"header": 2.0, "context": 1.5, "content": 1.0}
FORMAT_VERSION = 1
STAGE1_K = 100
STAGE2_ROWS = 10
STAGE2_THRESHOLD = 0.8


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class FieldedDoc:
    table_id: str
    header_text: Counter
    context_text: Counter
    content_text: Counter

    def field(self, name: str) -> Counter:
        return getattr(self, f"{name}_text")

    @classmethod
    def from_table(cls, t: WebTable) -> "FieldedDoc":
        header = Counter(tok for row in t.header for cell in row for tok in cell)
        context = Counter(tok for s in t.context for tok in tokenize(s.text))
        context.update(tok for title in t.title_rows for tok in tokenize(title))
        content = Counter(tok for row in t.body for cell in row for tok in tokenize(cell))
        return cls(t.id, header, context, content)


class Index:
    """Immutable after construction; probes only read."""

    def __init__(self, tables: Iterable[WebTable]):
        self.tables: dict[str, WebTable] = {}
        self.docs: dict[str, FieldedDoc] = {}
        for t in tables:
            if t.id in self.tables:
                raise CorpusError(f"duplicate table id {t.id!r}")
            self.tables[t.id] = t
            self.docs[t.id] = FieldedDoc.from_table(t)
        self.postings: dict[str, dict[str, list[tuple[str, int]]]] = {f: defaultdict(list) for f in FIELDS}
        df: Counter = Counter()
        for tid in sorted(self.docs):
            doc = self.docs[tid]
            seen = set()
            for f in FIELDS:
                for term, tf in sorted(doc.field(f).items()):
                    self.postings[f][term].append((tid, tf))
                    seen.add(term)
            df.update(seen)
        self.df = df
        self.postings = {f: dict(sorted(p.items())) for f, p in self.postings.items()}
        self._norms = {
            (tid, f): math.sqrt(sum(self.tfidf_weight(w) ** 2 for w in self.docs[tid].field(f)))
            for tid in self.docs
            for f in FIELDS
        }

    @property
    def doc_count(self) -> int:
        return len(self.tables)

    def __len__(self) -> int:
        return len(self.tables)

    def tfidf_weight(self, w: str) -> float:
        """ln(1 + N / df(w)); unseen terms count as df = 1."""
        n = max(self.doc_count, 1)
        return math.log1p(n / max(self.df.get(w, 0), 1))

    def field_score(self, keywords: Iterable[str], table_id: str, field: str) -> float:
        """Cosine between the keyword set and one field, both as binary TI-weighted vectors."""
        kw = set(keywords)
        norm_d = self._norms[table_id, field]
        if not kw or norm_d == 0:
            return 0.0
        terms = self.docs[table_id].field(field)
        dot = sum(self.tfidf_weight(w) ** 2 for w in kw if w in terms)
        norm_q = math.sqrt(sum(self.tfidf_weight(w) ** 2 for w in kw))
        return dot / (norm_q * norm_d)

    def score(self, keywords: Iterable[str], table_id: str) -> float:
        kw = set(keywords)
        return sum(BOOSTS[f] * self.field_score(kw, table_id, f) for f in FIELDS)

    def probe(self, keywords: Iterable[str], k: int = STAGE1_K) -> list[str]:
        """Top-k table ids by boosted field cosine; ties broken by id."""
        kw = set(keywords)
        if k <= 0 or not kw:
            return []
        hits = {tid for f in FIELDS for w in kw for tid, _ in self.postings[f].get(w, ())}
        scored = [(self.score(kw, tid), tid) for tid in hits]
        scored = [x for x in scored if x[0] > 0]
        scored.sort(key=lambda x: (-x[0], x[1]))
        return [tid for _, tid in scored[:k]]

    def docs_with_all(self, tokens: Iterable[str], fields: Sequence[str]) -> set[str]:
        """Tables whose union of ``fields`` contains every token."""
        toks = set(tokens)
        if not toks:
            return set()
        result = None
        for w in toks:
            have = {tid for f in fields for tid, _ in self.postings[f].get(w, ())}
            result = have if result is None else result & have
            if not result:
                return set()
        return result

    # persistence

    def manifest(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "doc_count": self.doc_count,
            "fields": list(FIELDS),
            "boosts": BOOSTS,
            "vocabulary": len(self.df),
            "table_ids": sorted(self.tables),
        }

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        (d / "manifest.json").write_text(json.dumps(self.manifest(), indent=1, sort_keys=True) + "\n")
        postings = {f: {w: [list(p) for p in plist] for w, plist in self.postings[f].items()} for f in FIELDS}
        (d / "postings.json").write_text(json.dumps(postings, sort_keys=True, ensure_ascii=False) + "\n")
        with open(d / "tables.jsonl", "w", encoding="utf-8") as fh:
            for tid in sorted(self.tables):
                fh.write(json.dumps(self.tables[tid].to_json(), ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, directory) -> "Index":
        d = Path(directory)
        manifest_path = d / "manifest.json"
        if not manifest_path.exists():
            raise FileNotFoundError(f"no index at {d}")
        manifest = json.loads(manifest_path.read_text())
        if manifest.get("format_version") != FORMAT_VERSION:
            raise CorpusError(f"unsupported index format {manifest.get('format_version')}")
        tables = []
        with open(d / "tables.jsonl", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    tables.append(WebTable.from_json(json.loads(line)))
        return cls(tables)


def build_index(corpus: Iterable[WebTable]) -> Index:
    tables = list(corpus)
    if not tables:
        raise CorpusError("empty corpus")
    return Index(tables)


def probe(index: Index, keywords: Iterable[str], k: int = STAGE1_K) -> list[str]:
    return index.probe(keywords, k)


MapFn = Callable[[list[WebTable]], Mapping[str, float]]


def two_stage_retrieve(
    index: Index,
    query: Sequence[Sequence[str]],
    map_fn: MapFn | None,
    *,
    k: int = STAGE1_K,
    seed: int = 0,
    threshold: float = STAGE2_THRESHOLD,
    n_rows: int = STAGE2_ROWS,
) -> list[WebTable]:
    """Stage 1 probes with all query tokens; stage 2 re-probes with rows of confident tables.

    ``map_fn`` maps the stage-1 tables to relevance probabilities. Up to two
    tables at or above ``threshold`` are taken as confident; ``n_rows`` of
    their body rows, drawn with ``random.Random(seed)``, are added to the
    keywords of a second probe. The result is stage 1 followed by the new
    stage-2 tables.
    """
    if not query:
        raise ValueError("query needs at least one column")
    keywords = {w for col in query for w in col}
    stage1 = [index.tables[tid] for tid in index.probe(keywords, k)]
    if map_fn is None or not stage1:
        return stage1
    relevance = map_fn(stage1)
    confident = sorted(
        (t for t in stage1 if relevance.get(t.id, 0.0) >= threshold),
        key=lambda t: (-relevance[t.id], t.id),
    )[:2]
    if not confident:
        return stage1
    rows = [row for t in confident for row in t.body]
    rng = random.Random(seed)
    sample = rng.sample(rows, min(n_rows, len(rows)))
    extra = {w for row in sample for cell in row for w in tokenize(cell)}
    seen = {t.id for t in stage1}
    stage2 = [index.tables[tid] for tid in index.probe(keywords | extra, k) if tid not in seen]
    return stage1 + stage2
