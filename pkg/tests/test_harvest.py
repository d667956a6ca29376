import pytest

from tablequery.fixtures import explorer_documents
from tablequery.harvest import (
    CellFormat,
    RawDocument,
    WebTable,
    classify_rows,
    extract_context,
    extract_tables,
    parse_html,
    read_jsonl,
    table_grid,
    write_jsonl,
)

BOLD = CellFormat(bold=True)
PLAIN = CellFormat()


def _page(body: str) -> str:
    return f"<html><body>{body}</body></html>"


def _rows(rows, cell="td"):
    return "".join("<tr>" + "".join(f"<{cell}>{c}</{cell}>" for c in r) + "</tr>" for r in rows)


def test_forest_reserves_title_and_header():
    doc = explorer_documents()[2]
    node = parse_html(doc.html).find("table")
    grid, fmts = table_grid(node)
    assert grid[0] == ["Forest reserves"] * 3
    assert classify_rows(grid, fmts) == (1, 1)


def test_uniform_numeric_grid_has_no_header():
    grid = [["1", "2", "3"], ["4", "5", "6"], ["7", "8", "9"]]
    assert classify_rows(grid) == (0, 0)


def test_bold_text_row_over_numbers_is_header():
    grid = [["Year", "Count"], ["1999", "12"], ["2000", "15"]]
    fmts = [[BOLD, BOLD], [PLAIN, PLAIN], [PLAIN, PLAIN]]
    assert classify_rows(grid, fmts) == (0, 1)


def test_classify_rows_rejects_ragged_grid():
    with pytest.raises(ValueError):
        classify_rows([["a", "b"], ["c"]])


def test_explorer_table():
    (t,) = extract_tables(explorer_documents()[0])
    assert (t.h, t.n_t) == (1, 3)
    assert t.header[0] == [["name"], ["nationality"], ["main", "areas", "explored"]]
    assert t.body[1] == ["Vasco da Gama", "Portuguese", "Sea route to India"]
    assert t.id == "T1#0"


def test_tiny_table_filtered():
    doc = RawDocument("u", _page("<table>" + _rows([["a"], ["b"]]) + "</table>"))
    assert extract_tables(doc) == []


def test_nested_layout_table_keeps_inner_table():
    inner = "<table>" + _rows([["Name", "Age"]], "th") + _rows([["A", "1"], ["B", "2"], ["C", "3"]]) + "</table>"
    outer = f"<table><tr><td>menu</td><td>{inner}</td></tr></table>"
    tables = extract_tables(RawDocument("u", _page(outer)))
    assert len(tables) == 1
    assert tables[0].header[0] == [["name"], ["age"]]
    assert tables[0].id == "u#1"


def test_malformed_html_does_not_crash():
    html = "<table><tr><td>a<td>b<tr><td>c<td>d<tr><td>e<td>f<tr><td>g<td>h"
    tables = extract_tables(RawDocument("u", html))
    assert all(len(r) == 2 for t in tables for r in t.body)


def test_empty_document_rejected():
    with pytest.raises(ValueError):
        RawDocument("u", "")


def test_colspan_and_rowspan_duplicate():
    html = "<table><tr><td colspan=2>x</td><td rowspan=2>y</td></tr><tr><td>a</td><td>b</td></tr></table>"
    grid, fmts = table_grid(parse_html(html).find("table"))
    assert grid == [["x", "x", "y"], ["a", "b", "y"]]
    assert fmts[0][1].span_copy and fmts[1][2].span_copy
    assert not fmts[0][0].span_copy


def _context_for(body: str):
    dom = parse_html(_page(body))
    return extract_context(dom, dom.find("table"))


TABLE = "<table>" + _rows([["1", "2"]] * 3) + "</table>"


def test_single_preceding_paragraph():
    snippets = _context_for(f"<p>Only text</p>{TABLE}")
    assert [s.text for s in snippets] == ["Only text"]
    assert snippets[0].score == max(s.score for s in snippets)


def test_nearer_snippet_scores_higher():
    snippets = _context_for(f"<p>far away</p><div><div><div><p>close by</p>{TABLE}</div></div></div>")
    scores = {s.text: s.score for s in snippets}
    assert scores["close by"] > scores["far away"] > 0
    assert all(0 < s.score <= 1 for s in snippets)


def test_left_sibling_beats_right_sibling():
    scores = {s.text: s.score for s in _context_for(f"<p>before</p>{TABLE}<p>after</p>")}
    assert scores["before"] > scores["after"]


def test_no_text_outside_table():
    assert _context_for(TABLE) == []


def test_jsonl_round_trip(tmp_path):
    tables = [t for doc in explorer_documents() for t in extract_tables(doc)]
    path = tmp_path / "corpus.jsonl"
    write_jsonl(tables, path)
    again = list(read_jsonl(path))
    assert again == tables
    write_jsonl(again, tmp_path / "again.jsonl")
    assert (tmp_path / "again.jsonl").read_bytes() == path.read_bytes()


def test_webtable_rejects_ragged_body():
    with pytest.raises(ValueError):
        WebTable("x", "u", [], [], [["a", "b"], ["c"]])
