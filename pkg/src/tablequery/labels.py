"""Column labels: query columns 1..q plus ``NA`` (no match) and ``NR`` (irrelevant table).

Theta arrays index labels as ``[1, ..., q, NA, NR]``.
"""

from __future__ import annotations

from typing import Dict, Tuple

NA = 0
NR = -1

Labeling = Dict[str, Tuple[int, ...]]


def label_index(label: int, q: int) -> int:
    if label == NA:
        return q
    if label == NR:
        return q + 1
    if 1 <= label <= q:
        return label - 1
    raise ValueError(f"label {label} outside 1..{q}, na, nr")


def label_at(j: int, q: int) -> int:
    if j == q:
        return NA
    if j == q + 1:
        return NR
    return j + 1


def all_labels(q: int) -> list[int]:
    return [label_at(j, q) for j in range(q + 2)]


def label_name(label: int) -> int | str:
    return {NA: "na", NR: "nr"}.get(label, label)


def parse_label(value) -> int:
    if isinstance(value, str):
        v = value.strip().lower()
        if v == "na":
            return NA
        if v == "nr":
            return NR
        return int(v)
    return int(value)


def is_mapped(label: int) -> bool:
    return label >= 1
