"""Bundled corpora: the three explorer pages and a generated collective-inference corpus."""

from __future__ import annotations

import random
from importlib import resources

from .harvest import RawDocument, WebTable, extract_tables
from .labels import NR, Labeling

EXPLORER_COLUMNS = ["Name of explorers", "Nationality", "Areas explored"]


def explorer_documents() -> list[RawDocument]:
    base = resources.files("tablequery") / "data" / "explorers"
    return [
        RawDocument(f"T{i}", (base / f"T{i}.html").read_text(encoding="utf-8"))
        for i in (1, 2, 3)
    ]


def explorer_tables(max_rows: int | None = None) -> list[WebTable]:
    tables = [t for doc in explorer_documents() for t in extract_tables(doc)]
    if max_rows is not None:
        for t in tables:
            t.body = t.body[:max_rows]
    return tables


def explorer_gold() -> Labeling:
    return {"T1#0": (1, 2, 3), "T2#0": (3, 1), "T3#0": (NR, NR, NR)}


EXPLORER_ANSWER = [
    ("Vasco da Gama", "Portuguese", "Sea route to India"),
    ("Abel Tasman", "Dutch", "Oceania"),
    ("Christopher Columbus", "", "Caribbean"),
]

_PEOPLE = [
    ("Ada Lovelace", "British", "Mathematics"),
    ("Marie Curie", "Polish", "Chemistry"),
    ("Albert Einstein", "German", "Physics"),
    ("Niels Bohr", "Danish", "Physics"),
    ("Enrico Fermi", "Italian", "Physics"),
    ("Lise Meitner", "Austrian", "Physics"),
    ("Srinivasa Ramanujan", "Indian", "Mathematics"),
    ("Emmy Noether", "German", "Mathematics"),
    ("Alan Turing", "British", "Computing"),
    ("Grace Hopper", "American", "Computing"),
    ("Dmitri Mendeleev", "Russian", "Chemistry"),
    ("Rosalind Franklin", "British", "Biology"),
]
_CITIES = [
    ("Lyon", "France", "513000"),
    ("Porto", "Portugal", "232000"),
    ("Graz", "Austria", "291000"),
    ("Turku", "Finland", "195000"),
    ("Ghent", "Belgium", "263000"),
    ("Bergen", "Norway", "285000"),
    ("Malmo", "Sweden", "347000"),
    ("Split", "Croatia", "178000"),
]


def collective_fixture(seed: int = 7) -> tuple[list[str], list[WebTable], Labeling]:
    """Eight tables for the query "scientist name | nationality | field".

    Three have matching headers, three carry no header at all and share
    rows with the first three, and two are unrelated city tables whose
    headers mention "name". Returns columns, tables and gold labels.
    """
    rng = random.Random(seed)
    columns = ["scientist name", "nationality", "field"]
    tables: list[WebTable] = []
    gold: Labeling = {}

    def rows(k: int):
        return [list(p) for p in rng.sample(_PEOPLE, k)]

    headed = [
        (["Scientist name", "Nationality", "Field"], [0, 1, 2]),
        (["Name", "Nationality", "Field of work"], [0, 1, 2]),
        (["Field", "Scientist", "Nationality"], [2, 0, 1]),
    ]
    for k, (hdr, perm) in enumerate(headed):
        body = [[r[p] for p in perm] for r in rows(8)]
        tid = f"S{k + 1}"
        tables.append(
            WebTable(tid, f"fixture://{tid}", [], [[h.lower().split() for h in hdr]], body, [])
        )
        gold[tid] = tuple(p + 1 for p in perm)

    for k, perm in enumerate([[0, 1, 2], [1, 0, 2], [0, 2]]):
        body = [[r[p] for p in perm] for r in rows(7)]
        tid = f"U{k + 1}"
        tables.append(WebTable(tid, f"fixture://{tid}", [], [], body, []))
        gold[tid] = tuple(p + 1 for p in perm)

    for k in range(2):
        body = [list(r) for r in rng.sample(_CITIES, 5)]
        tid = f"C{k + 1}"
        tables.append(
            WebTable(tid, f"fixture://{tid}", [], [[["city", "name"], ["country"], ["population"]]], body, [])
        )
        gold[tid] = (NR, NR, NR)
    return columns, tables, gold

