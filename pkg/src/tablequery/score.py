"""Per-column similarity features feeding the node and edge potentials."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .harvest import WebTable
from .text import normalize_value, tokenize

TI = Callable[[str], float]

BODY_FREQUENCY = 0.3


@dataclass(frozen=True)
class Reliability:
    """Match reliability of the title, context, other-header-row, other-column and body parts."""

    T: float = 1.0
    C: float = 0.9
    Hc: float = 0.5
    Hr: float = 1.0
    B: float = 0.8

    def __post_init__(self):
        for name in ("T", "C", "Hc", "Hr", "B"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"reliability {name} outside [0, 1]")

    def as_tuple(self) -> tuple[float, ...]:
        return (self.T, self.C, self.Hc, self.Hr, self.B)


@dataclass
class QueryColumn:
    index: int
    tokens: list[str]

    def __post_init__(self):
        if not self.tokens:
            raise ValueError(f"query column {self.index} has no tokens")


def vector(tokens: Iterable[str], ti: TI) -> dict[str, float]:
    return {w: tf * ti(w) for w, tf in Counter(tokens).items()}


def sqnorm(tokens: Iterable[str], ti: TI) -> float:
    return sum(x * x for x in vector(tokens, ti).values())


def in_sim(p: Sequence[str], header: Sequence[str], ti: TI) -> float:
    """TF-IDF weighted cosine similarity of two token sequences."""
    if not p or not header:
        return 0.0
    a, b = vector(p, ti), vector(header, ti)
    na = math.sqrt(sum(x * x for x in a.values()))
    nb = math.sqrt(sum(x * x for x in b.values()))
    if na == 0 or nb == 0:
        return 0.0
    return min(1.0, sum(x * b.get(w, 0.0) for w, x in a.items()) / (na * nb))


def header_fraction(p: Sequence[str], header: Sequence[str], ti: TI) -> float:
    """Weighted share of P's tokens that occur in the header."""
    a = vector(p, ti)
    total = sum(x * x for x in a.values())
    if total == 0:
        return 0.0
    h = set(header)
    return sum(x * x for w, x in a.items() if w in h) / total


@dataclass
class TableParts:
    """Token sets of one table outside a given header cell.

    ``context`` maps each context token to the best score of a snippet
    containing it; that score scales the context reliability.
    """

    title: set[str]
    context: dict[str, float]
    header: list[list[list[str]]]
    frequent_body: set[str]

    @classmethod
    def from_table(cls, t: WebTable, body_frequency: float = BODY_FREQUENCY) -> "TableParts":
        context: dict[str, float] = {}
        for s in t.context:
            for w in tokenize(s.text):
                context[w] = max(context.get(w, 0.0), s.score)
        frequent: set[str] = set()
        for c in range(t.n_t):
            cells = [set(tokenize(v)) for v in t.column(c)]
            cells = [x for x in cells if x]
            counts = Counter(w for x in cells for w in x)
            frequent |= {w for w, n in counts.items() if n >= body_frequency * len(cells)}
        return cls(
            title={w for row in t.title_rows for w in tokenize(row)},
            context=context,
            header=t.header,
            frequent_body=frequent,
        )

    def match_probability(self, w: str, r: int, c: int, rel: Reliability) -> float:
        """Soft-max of the reliabilities of every part that contains ``w``."""
        miss = 1.0
        if w in self.title:
            miss *= 1.0 - rel.T
        if w in self.context:
            miss *= 1.0 - rel.C * self.context[w]
        if any(w in self.header[r2][c] for r2 in range(len(self.header)) if r2 != r):
            miss *= 1.0 - rel.Hc
        if any(w in self.header[r][c2] for c2 in range(len(self.header[r])) if c2 != c):
            miss *= 1.0 - rel.Hr
        if w in self.frequent_body:
            miss *= 1.0 - rel.B
        return 1.0 - miss


def out_sim(s: Sequence[str], parts: TableParts, r: int, c: int, ti: TI, rel: Reliability = Reliability()) -> float:
    a = vector(s, ti)
    total = sum(x * x for x in a.values())
    if total == 0:
        return 0.0
    return sum(x * x / total * parts.match_probability(w, r, c, rel) for w, x in a.items())


def _splits(tokens: Sequence[str]):
    """(P, S) pairs with P the header-matched part, prefix or suffix, never empty."""
    m = len(tokens)
    for k in range(1, m + 1):
        yield tokens[:k], tokens[k:]
        if k < m:
            yield tokens[m - k :], tokens[: m - k]


def _segmented(
    query: Sequence[str], parts: TableParts, c: int, ti: TI, rel: Reliability, head_score
) -> float:
    q2 = sqnorm(query, ti)
    if q2 == 0:
        return 0.0
    best = 0.0
    for r, row in enumerate(parts.header):
        h = row[c]
        hset = set(h)
        if not hset & set(query):
            continue
        for p, s in _splits(list(query)):
            if not hset & set(p):
                continue
            val = sqnorm(p, ti) / q2 * head_score(p, h, ti)
            if s:
                val += sqnorm(s, ti) / q2 * out_sim(s, parts, r, c, ti, rel)
            best = max(best, val)
    return min(best, 1.0)


def seg_sim(query: Sequence[str], parts: TableParts, c: int, ti: TI, rel: Reliability = Reliability()) -> float:
    """Best two-part split of the query: one part anchored in a header row of
    column ``c``, the rest matched against the rest of the table."""
    return _segmented(query, parts, c, ti, rel, in_sim)


def cover(query: Sequence[str], parts: TableParts, c: int, ti: TI, rel: Reliability = Reliability()) -> float:
    return _segmented(query, parts, c, ti, rel, header_fraction)


def pmi2(query: Sequence[str], table: WebTable, c: int, index) -> float:
    """Corpus co-occurrence of query keywords with the cells of column ``c``.

    H = tables with every query token in header or context; B(cell) = tables
    with every cell token in their content. Cells whose B is empty add 0.
    """
    h = index.docs_with_all(query, ("header", "context"))
    if not h or not table.body:
        return 0.0
    total = 0.0
    for cell in table.column(c):
        b = index.docs_with_all(tokenize(cell), ("content",))
        if b:
            total += len(h & b) ** 2 / (len(h) * len(b))
    return total / len(table.body)


def table_relevance(max_covers: Sequence[float]) -> float:
    """(1/q) clip(sum of per-query-column best cover, min(q, 1.5))."""
    q = len(max_covers)
    a = sum(max_covers)
    return 0.0 if a < min(q, 1.5) else a / q


def value_set(t: WebTable, c: int) -> set[str]:
    return {v for v in (normalize_value(x) for x in t.column(c)) if v}


def header_tokens(t: WebTable, c: int) -> list[str]:
    return [w for row in t.header for w in row[c]]


def jaccard(a: set, b: set) -> float:
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


def column_sim(a: WebTable, ca: int, b: WebTable, cb: int, ti: TI) -> float:
    """0.8 * Jaccard of normalized cell values + 0.2 * header cosine."""
    return 0.8 * jaccard(value_set(a, ca), value_set(b, cb)) + 0.2 * in_sim(
        header_tokens(a, ca), header_tokens(b, cb), ti
    )


@dataclass
class ColumnFeatures:
    """Weight-independent node features of one table, indexed [column][query column]."""

    seg: list[list[float]]
    cover: list[list[float]]
    pmi: list[list[float]]
    relevance: float
    n_t: int


def table_features(
    query: Sequence[Sequence[str]],
    table: WebTable,
    ti: TI,
    rel: Reliability = Reliability(),
    index=None,
    parts: TableParts | None = None,
) -> ColumnFeatures:
    parts = parts or TableParts.from_table(table)
    q = len(query)
    seg = [[seg_sim(query[l], parts, c, ti, rel) for l in range(q)] for c in range(table.n_t)]
    cov = [[cover(query[l], parts, c, ti, rel) for l in range(q)] for c in range(table.n_t)]
    if index is not None:
        pm = [[pmi2(query[l], table, c, index) for l in range(q)] for c in range(table.n_t)]
    else:
        pm = [[0.0] * q for _ in range(table.n_t)]
    best = [max(cov[c][l] for c in range(table.n_t)) for l in range(q)]
    return ColumnFeatures(seg, cov, pm, table_relevance(best), table.n_t)
