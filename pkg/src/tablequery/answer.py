"""Consolidate mapped columns into one answer table, rank rows, score labelings."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .harvest import WebTable
from .labels import NR, Labeling, label_name, parse_label
from .text import normalize_value


@dataclass
class AnswerRow:
    cells: list[str]
    sources: list[tuple[str, int]] = field(default_factory=list)
    cell_sources: list[tuple[str, int, int] | None] = field(default_factory=list)

    @property
    def support(self) -> int:
        return len({tid for tid, _ in self.sources})


@dataclass
class AnswerTable:
    columns: list[str]
    rows: list[AnswerRow] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow(r.cells)
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "columns": self.columns,
            "rows": [
                {
                    "cells": r.cells,
                    "support": r.support,
                    "sources": [list(s) for s in r.sources],
                    "cell_sources": [list(s) if s else None for s in r.cell_sources],
                }
                for r in self.rows
            ],
        }


def _compatible(a: AnswerRow, cells: Sequence[str]) -> bool:
    return all(
        not x.strip() or not y.strip() or x.strip() == y.strip()
        for x, y in zip(a.cells[1:], cells[1:])
    )


def consolidate(
    tables: Sequence[WebTable], y: Labeling, columns: Sequence[str]
) -> AnswerTable:
    """Project every relevant table onto the query columns and merge duplicate rows.

    Rows merge when their first-column cells agree after normalization and
    the remaining cells agree wherever both are filled; empty cells are
    filled from the merged row.
    """
    q = len(columns)
    answer = AnswerTable(list(columns))
    by_key: dict[str, list[AnswerRow]] = {}
    for t in tables:
        labels = y[t.id]
        if all(l == NR for l in labels):
            continue
        col_for = {l: c for c, l in enumerate(labels) if l >= 1}
        for r, row in enumerate(t.body):
            cells = [row[col_for[l]] if l in col_for else "" for l in range(1, q + 1)]
            if not any(x.strip() for x in cells):
                continue
            srcs = [(t.id, r, col_for[l]) if l in col_for and row[col_for[l]].strip() else None for l in range(1, q + 1)]
            key = normalize_value(cells[0])
            target = None
            if key:
                target = next((a for a in by_key.get(key, []) if _compatible(a, cells)), None)
            if target is None:
                target = AnswerRow([""] * q, [], [None] * q)
                answer.rows.append(target)
                if key:
                    by_key.setdefault(key, []).append(target)
            for l in range(q):
                if not target.cells[l].strip() and cells[l].strip():
                    target.cells[l] = cells[l]
                    target.cell_sources[l] = srcs[l]
            target.sources.append((t.id, r))
    return answer


def rank_rows(answer: AnswerTable, relevance: Mapping[str, float]) -> AnswerTable:
    """Order by support, then best source relevance, then first-column text."""

    def key(row: AnswerRow):
        best = max((relevance.get(tid, 0.0) for tid, _ in row.sources), default=0.0)
        return (-row.support, -best, row.cells[0].casefold())

    return AnswerTable(list(answer.columns), sorted(answer.rows, key=key))


def f1_error(y: Labeling, gold: Labeling) -> float:
    """1 - 2 * correct mapped / (predicted mapped + gold mapped); 0 when neither maps anything."""
    if set(y) != set(gold):
        raise ValueError("labelings cover different tables")
    correct = pred = true = 0
    for tid in y:
        a, b = y[tid], gold[tid]
        if len(a) != len(b):
            raise ValueError(f"labelings of {tid} differ in length")
        for la, lb in zip(a, b):
            pred += la >= 1
            true += lb >= 1
            correct += la >= 1 and la == lb
    if pred + true == 0:
        return 0.0
    return 1.0 - 2.0 * correct / (pred + true)


def row_set_error(answer: AnswerTable, gold_rows: Sequence[Sequence[str]]) -> float:
    """Symmetric-difference rate between normalized answer rows and a gold row set.

    A rough answer-quality stand-in, not the column-mapping F1 error.
    """
    a = {tuple(normalize_value(x) for x in r.cells) for r in answer.rows}
    b = {tuple(normalize_value(x) for x in r) for r in gold_rows}
    union = a | b
    return len(a ^ b) / len(union) if union else 0.0


# --- gold labeling files -------------------------------------------------------


def labeling_to_json(query_id: str, y: Labeling) -> dict:
    return {
        "query_id": query_id,
        "labels": [[tid, c, label_name(l)] for tid in sorted(y) for c, l in enumerate(y[tid])],
    }


def labeling_from_json(d: Mapping) -> tuple[str, Labeling]:
    cols: dict[str, dict[int, int]] = {}
    for tid, c, label in d["labels"]:
        cols.setdefault(tid, {})[int(c)] = parse_label(label)
    y = {}
    for tid, m in cols.items():
        if sorted(m) != list(range(len(m))):
            raise ValueError(f"gold labels of {tid} skip columns")
        y[tid] = tuple(m[c] for c in range(len(m)))
    return d.get("query_id", ""), y


def load_gold(path) -> dict[str, Labeling]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = [data]
    return dict(labeling_from_json(d) for d in data)
