"""Turn HTML documents into WebTable records.

Rows of each retained ``<table>`` are split into title, header and body rows
by comparing their formatting, layout and content signals, and every text
node hanging off the root-to-table path becomes a scored context snippet.
"""

from __future__ import annotations

import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from bs4 import BeautifulSoup, Comment, Doctype, NavigableString, Tag

from .text import is_numeric, tokenize

log = logging.getLogger(__name__)

MIN_COLUMNS = 2
MIN_BODY_ROWS = 3
MAX_CELL_CHARS = 500
MIN_FILLED_FRACTION = 0.5
SIMILAR_AGREEMENT = 0.7
RIGHT_SIBLING_WEIGHT = 0.7

FORMAT_TAGS = frozenset(
    "b strong i em u code tt th caption title font big mark h1 h2 h3 h4 h5 h6".split()
)
_SKIP_TEXT = ("script", "style", "noscript", "table", "template")
_WS = re.compile(r"\s+")


class HarvestError(ValueError):
    """The document as a whole could not be parsed."""


@dataclass(frozen=True)
class RawDocument:
    url: str
    html: str

    def __post_init__(self):
        if not self.html:
            raise ValueError("empty document")


@dataclass(frozen=True)
class ContextSnippet:
    text: str
    score: float


@dataclass
class WebTable:
    """A harvested table. ``header`` is an h x n_t grid of token lists."""

    id: str
    url: str
    title_rows: list[str]
    header: list[list[list[str]]]
    body: list[list[str]]
    context: list[ContextSnippet] = field(default_factory=list)

    def __post_init__(self):
        widths = {len(r) for r in self.body} | {len(r) for r in self.header}
        if len(widths) > 1:
            raise ValueError(f"table {self.id}: ragged grid {sorted(widths)}")
        if not widths or widths == {0}:
            raise ValueError(f"table {self.id}: no columns")

    @property
    def n_t(self) -> int:
        return len(self.body[0]) if self.body else len(self.header[0])

    @property
    def h(self) -> int:
        return len(self.header)

    def column(self, c: int) -> list[str]:
        return [row[c] for row in self.body]

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "url": self.url,
            "title_rows": list(self.title_rows),
            "header": [[list(cell) for cell in row] for row in self.header],
            "body": [list(row) for row in self.body],
            "context": [{"text": s.text, "score": s.score} for s in self.context],
        }

    @classmethod
    def from_json(cls, d: dict) -> "WebTable":
        return cls(
            id=d["id"],
            url=d["url"],
            title_rows=list(d["title_rows"]),
            header=[[list(cell) for cell in row] for row in d["header"]],
            body=[list(row) for row in d["body"]],
            context=[ContextSnippet(s["text"], s["score"]) for s in d["context"]],
        )


def write_jsonl(tables: Iterable[WebTable], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in tables:
            fh.write(json.dumps(t.to_json(), ensure_ascii=False) + "\n")


def read_jsonl(path) -> Iterator[WebTable]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield WebTable.from_json(json.loads(line))


# --- row classification -----------------------------------------------------


@dataclass(frozen=True)
class CellFormat:
    bold: bool = False
    italic: bool = False
    underline: bool = False
    code: bool = False
    th: bool = False
    background: str = ""
    span_copy: bool = False


_FLAGS = ("bold", "italic", "underline", "code", "caps", "th")


def _row_signals(cells: Sequence[str], fmts: Sequence[CellFormat]) -> dict:
    filled = [(c, f) for c, f in zip(cells, fmts) if c.strip() and not f.span_copy]
    if not filled:
        filled = [(c, f) for c, f in zip(cells, fmts) if c.strip()]
    n = len(filled)

    def majority(pred) -> bool:
        return n > 0 and sum(1 for c, f in filled if pred(c, f)) * 2 > n

    backgrounds = Counter(f.background for f in fmts)
    return {
        "bold": majority(lambda c, f: f.bold),
        "italic": majority(lambda c, f: f.italic),
        "underline": majority(lambda c, f: f.underline),
        "code": majority(lambda c, f: f.code),
        "caps": majority(lambda c, f: c.isupper()),
        "th": majority(lambda c, f: f.th),
        "background": backgrounds.most_common(1)[0][0] if fmts else "",
        "numeric": "empty" if n == 0 else majority(lambda c, f: is_numeric(c)),
        "length": sum(len(c.strip()) for c, _ in filled) / n if n else 0.0,
    }


def _similar(a: dict, b: dict) -> bool:
    agree = total = 0
    for flag in _FLAGS:
        if a[flag] or b[flag]:
            total += 1
            agree += a[flag] == b[flag]
    if a["background"] or b["background"]:
        total += 1
        agree += a["background"] == b["background"]
    total += 2
    agree += a["numeric"] == b["numeric"]
    la, lb = a["length"], b["length"]
    agree += (la == lb == 0) or (min(la, lb) > 0 and max(la, lb) <= 2 * min(la, lb))
    return agree >= SIMILAR_AGREEMENT * total


def classify_rows(
    grid: Sequence[Sequence[str]],
    format_annotations: Sequence[Sequence[CellFormat]] | None = None,
) -> tuple[int, int]:
    """Return ``(title_count, header_count)`` for a rectangular cell grid.

    Rows are scanned from the top while they look different from most rows
    below them. Such a row is a title when every cell after the first is
    empty (span copies count as empty) and no header has been seen yet,
    otherwise it opens the header block. Later rows stay headers while they
    resemble the first header row and still differ from the rows below.
    """
    if not grid:
        raise ValueError("empty grid")
    if len({len(r) for r in grid}) != 1:
        raise ValueError("grid must be rectangular")
    if format_annotations is None:
        format_annotations = [[CellFormat()] * len(r) for r in grid]
    sig = [_row_signals(r, f) for r, f in zip(grid, format_annotations)]
    n = len(grid)

    def different(i: int) -> bool:
        below = range(i + 1, n)
        return len(below) > 0 and sum(not _similar(sig[i], sig[j]) for j in below) * 2 > len(below)

    def is_title(i: int) -> bool:
        row, fmts = grid[i], format_annotations[i]
        return bool(row[0].strip()) and all(
            not c.strip() or f.span_copy for c, f in zip(row[1:], fmts[1:])
        )

    titles = headers = 0
    first_header = -1
    for i in range(n):
        if headers == 0:
            if not different(i):
                break
            if is_title(i):
                titles += 1
            else:
                headers, first_header = 1, i
        elif _similar(sig[i], sig[first_header]) and different(i):
            headers += 1
        else:
            break
    return titles, headers


# --- DOM helpers -----------------------------------------------------------------


def _clean(text: str) -> str:
    return _WS.sub(" ", text).strip()


def _is_text(node) -> bool:
    return isinstance(node, NavigableString) and not isinstance(node, (Comment, Doctype))


def _text_nodes(node) -> Iterator[NavigableString]:
    """Visible text nodes under ``node``, skipping scripts and nested tables."""
    if _is_text(node):
        if node.strip():
            yield node
        return
    if isinstance(node, Tag):
        if node.name in _SKIP_TEXT:
            return
        for child in node.children:
            yield from _text_nodes(child)


def _format_signature(text_node) -> frozenset:
    return frozenset(p.name for p in text_node.parents if p.name in FORMAT_TAGS)


def _cell_format(cell: Tag, row: Tag) -> CellFormat:
    names = {t.name for t in cell.find_all(True)}
    style = (cell.get("style") or "").lower()
    bg = " ".join(
        filter(
            None,
            [
                " ".join(row.get("class") or []),
                row.get("bgcolor") or "",
                " ".join(cell.get("class") or []),
                cell.get("bgcolor") or "",
                "bg" if "background" in style else "",
            ],
        )
    )
    return CellFormat(
        bold=cell.name == "th" or bool(names & {"b", "strong"}) or "bold" in style,
        italic=bool(names & {"i", "em"}) or "italic" in style,
        underline=bool(names & {"u"}) or "underline" in style,
        code=bool(names & {"code", "tt"}),
        th=cell.name == "th",
        background=bg,
    )


def _own_rows(table: Tag) -> list[Tag]:
    return [tr for tr in table.find_all("tr") if tr.find_parent("table") is table]


def _span(cell: Tag, attr: str) -> int:
    try:
        return max(1, min(int(cell.get(attr, 1)), 100))
    except (TypeError, ValueError):
        return 1


def table_grid(table: Tag) -> tuple[list[list[str]], list[list[CellFormat]]]:
    """Cell texts and formats with colspan/rowspan expanded by duplication."""
    grid: list[list[str | None]] = []
    fmts: list[list[CellFormat | None]] = []
    for r, tr in enumerate(_own_rows(table)):
        while len(grid) <= r:
            grid.append([])
            fmts.append([])
        c = 0
        for cell in tr.find_all(["td", "th"], recursive=False):
            while c < len(grid[r]) and grid[r][c] is not None:
                c += 1
            text = _clean(" ".join(_text_nodes(cell)))
            fmt = _cell_format(cell, tr)
            rs, cs = _span(cell, "rowspan"), _span(cell, "colspan")
            for dr in range(rs):
                while len(grid) <= r + dr:
                    grid.append([])
                    fmts.append([])
                for dc in range(cs):
                    row, frow = grid[r + dr], fmts[r + dr]
                    while len(row) <= c + dc:
                        row.append(None)
                        frow.append(None)
                    row[c + dc] = text
                    copy = dr > 0 or dc > 0
                    frow[c + dc] = CellFormat(**{**fmt.__dict__, "span_copy": copy})
            c += cs
    width = max((len(r) for r in grid), default=0)
    out_grid = [[x if x is not None else "" for x in r] + [""] * (width - len(r)) for r in grid]
    out_fmts = [
        [f if f is not None else CellFormat() for f in fr] + [CellFormat()] * (width - len(fr))
        for fr in fmts
    ]
    keep = [i for i, r in enumerate(out_grid) if any(x.strip() for x in r)]
    return [out_grid[i] for i in keep], [out_fmts[i] for i in keep]


def extract_context(dom, table_node: Tag) -> list[ContextSnippet]:
    """Score every text sibling of a node on the root-to-table path.

    score = 0.5 ** (distance - 2) * side * rarity, where distance is the tree
    edge distance from the snippet to the table (2 for the table's own
    siblings), side is 1.0 for preceding and 0.7 for following siblings, and
    rarity = 1 - 0.5 * (share of the document's text nodes carrying the same
    set of format tags). Results are sorted by descending score.
    """
    all_text = list(_text_nodes(dom)) if isinstance(dom, Tag) else []
    signature_counts = Counter(_format_signature(t) for t in all_text)
    n_text = max(len(all_text), 1)

    def rarity(nodes) -> float:
        return max(1.0 - 0.5 * signature_counts[_format_signature(t)] / n_text for t in nodes)

    found: list[tuple[float, int, str]] = []
    order = 0
    node, level = table_node, 0
    while node.parent is not None:
        parent = node.parent
        side = 1.0
        for sib in parent.contents:
            if sib is node:
                side = RIGHT_SIBLING_WEIGHT
                continue
            nodes = list(_text_nodes(sib))
            if not nodes:
                continue
            text = _clean(" ".join(nodes))
            if not text:
                continue
            score = 0.5**level * side * rarity(nodes)
            found.append((score, order, text))
            order += 1
        node, level = parent, level + 1
    found.sort(key=lambda x: (-x[0], x[1]))
    return [ContextSnippet(text, score) for score, _, text in found]


def is_data_table(grid: Sequence[Sequence[str]], n_header: int) -> bool:
    if not grid or len(grid[0]) < MIN_COLUMNS:
        return False
    body = grid[n_header:]
    if len(body) < MIN_BODY_ROWS:
        return False
    cells = [c for row in grid for c in row]
    if any(len(c) > MAX_CELL_CHARS for c in cells):
        return False
    body_cells = [c for row in body for c in row]
    return sum(1 for c in body_cells if c.strip()) >= MIN_FILLED_FRACTION * len(body_cells)


def parse_html(html: str) -> BeautifulSoup:
    try:
        return BeautifulSoup(html, "lxml")
    except Exception as exc:  # parser-level failure only
        raise HarvestError(str(exc)) from exc


def extract_tables(doc: RawDocument) -> list[WebTable]:
    """All relational tables of a document, with header rows and context.

    Tables that contain other tables, have fewer than two columns or three
    body rows, carry huge cells, or are mostly empty are dropped. Table ids
    are ``<url>#<k>`` with ``k`` the position among all ``<table>`` tags.
    """
    soup = parse_html(doc.html)
    out = []
    for k, node in enumerate(soup.find_all("table")):
        if node.find("table") is not None:
            continue
        grid, fmts = table_grid(node)
        if not grid:
            continue
        n_title, n_header = classify_rows(grid, fmts)
        if not is_data_table(grid, n_title + n_header):
            log.debug("dropping non-data table %s#%d", doc.url, k)
            continue
        titles = grid[:n_title]
        headers = grid[n_title : n_title + n_header]
        out.append(
            WebTable(
                id=f"{doc.url}#{k}",
                url=doc.url,
                title_rows=[_title_text(r) for r in titles],
                header=[[tokenize(c) for c in row] for row in headers],
                body=[list(r) for r in grid[n_title + n_header :]],
                context=extract_context(soup, node),
            )
        )
    return out


def _title_text(row: Sequence[str]) -> str:
    seen: list[str] = []
    for c in row:
        if c.strip() and c not in seen:
            seen.append(c)
    return " ".join(seen)
