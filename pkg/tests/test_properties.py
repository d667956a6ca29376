"""Randomized invariants, checked with hypothesis."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tablequery.answer import consolidate, f1_error
from tablequery.flow import max_weight_matching
from tablequery.harvest import CellFormat, ContextSnippet, RawDocument, WebTable, classify_rows, extract_tables
from tablequery.index import build_index, two_stage_retrieve
from tablequery.infer import brute_force_max_marginals, column_confidence, max_marginals
from tablequery.labels import NA, NR
from tablequery.model import Edge, Model, check_constraints, edge_potential, normalized_sim, objective
from tablequery.score import TableParts, column_sim, cover, in_sim, out_sim, seg_sim

from oracles import brute_matching

WORDS = st.sampled_from(["name", "city", "year", "nobel", "prize", "winner", "area", "river", "x1", "42"])
TOKENS = st.lists(WORDS, min_size=1, max_size=4)
CELLS = st.sampled_from(["Ada", "Bob", "Oslo", "Rome", "1901", "42", "", "nobel prize"])
TI = {"name": 1.0, "city": 2.0, "year": 0.5, "nobel": 3.0, "prize": 2.5, "winner": 1.5}


def ti(w):
    return TI.get(w, 1.0)


@st.composite
def tables(draw, tid="t", min_rows=1):
    n = draw(st.integers(1, 3))
    rows = draw(st.integers(min_rows, 4))
    body = [[draw(CELLS) for _ in range(n)] for _ in range(rows)]
    h = draw(st.integers(0, 2))
    header = [[draw(st.lists(WORDS, max_size=2)) for _ in range(n)] for _ in range(h)]
    context = [ContextSnippet(" ".join(draw(TOKENS)), draw(st.floats(0.05, 1.0))) for _ in range(draw(st.integers(0, 2)))]
    titles = [" ".join(draw(TOKENS)) for _ in range(draw(st.integers(0, 1)))]
    return WebTable(tid, tid, titles, header, body, context)


labels_for = lambda q: st.sampled_from([NA, NR] + list(range(1, q + 1)))  # noqa: E731


# --- harvest -------------------------------------------------------------------------


@given(st.lists(st.lists(CELLS, min_size=3, max_size=3), min_size=1, max_size=6), st.data())
def test_classify_rows_bounds(grid, data):
    fmts = [[CellFormat(bold=data.draw(st.booleans())) for _ in row] for row in grid]
    n_title, n_header = classify_rows(grid, fmts)
    assert 0 <= n_title and 0 <= n_header and n_title + n_header <= len(grid)
    assert classify_rows(grid, fmts) == (n_title, n_header)


@given(st.lists(st.lists(CELLS, min_size=2, max_size=2), min_size=3, max_size=6), st.lists(TOKENS, max_size=3))
def test_harvest_round_trip(rows, paragraphs):
    body = "".join(f"<p>{' '.join(p)}</p>" for p in paragraphs)
    table = "<table>" + "".join("<tr>" + "".join(f"<td>{c}</td>" for c in r) + "</tr>" for r in rows) + "</table>"
    for t in extract_tables(RawDocument("u", f"<html><body>{body}{table}</body></html>")):
        assert all(len(r) == t.n_t for r in t.body)
        assert all(0 < s.score <= 1 for s in t.context)
        assert WebTable.from_json(t.to_json()) == t


# --- index ---------------------------------------------------------------------------


@given(st.lists(tables(), min_size=1, max_size=4), TOKENS, WORDS)
def test_header_term_never_lowers_score(ts, keywords, extra):
    ts = [WebTable(f"t{i}", "u", t.title_rows, t.header, t.body, t.context) for i, t in enumerate(ts)]
    target = ts[0]
    keywords = keywords + [extra]
    header = [list(map(list, row)) for row in target.header] or [[[] for _ in range(target.n_t)]]
    target = ts[0] = WebTable(target.id, "u", target.title_rows, header, target.body, target.context)
    before = build_index(ts).score(keywords, target.id)
    header = [list(map(list, row)) for row in target.header]
    header[0][0] = header[0][0] + [extra]
    ts[0] = WebTable(target.id, "u", target.title_rows, header, target.body, target.context)
    assert build_index(ts).score(keywords, target.id) >= before - 1e-12


@given(st.lists(tables(min_rows=1), min_size=1, max_size=5), st.lists(TOKENS, min_size=1, max_size=3), st.integers(0, 9))
def test_stage_two_extends_stage_one(ts, query, seed):
    ts = [WebTable(f"t{i}", "u", t.title_rows, t.header, t.body, t.context) for i, t in enumerate(ts)]
    idx = build_index(ts)
    first = [t.id for t in two_stage_retrieve(idx, query, None)]
    both = [t.id for t in two_stage_retrieve(idx, query, lambda c: {t.id: 0.9 for t in c}, seed=seed)]
    assert both[: len(first)] == first
    assert len(set(both)) == len(both)


# --- score ---------------------------------------------------------------------------


@given(TOKENS, TOKENS)
def test_in_sim_range(p, h):
    assert 0.0 <= in_sim(p, h, ti) <= 1.0


@given(tables(), TOKENS)
def test_features_in_unit_interval(t, query):
    parts = TableParts.from_table(t)
    for c in range(t.n_t):
        assert 0.0 <= seg_sim(query, parts, c, ti) <= 1.0
        assert 0.0 <= cover(query, parts, c, ti) <= 1.0


@given(tables(), TOKENS)
def test_seg_sim_needs_a_header_anchor(t, query):
    parts = TableParts.from_table(t)
    for c in range(t.n_t):
        if not any(set(row[c]) & set(query) for row in t.header):
            assert seg_sim(query, parts, c, ti) == 0.0


@given(TOKENS, st.sets(WORDS), st.sets(WORDS), st.sets(WORDS), WORDS)
def test_out_sim_monotone(s, title, context, body, added):
    p = TableParts(set(title), {w: 1.0 for w in context}, [[["anchor"]]], set(body))
    before = out_sim(s, p, 0, 0, ti)
    p.frequent_body.add(added)
    assert out_sim(s, p, 0, 0, ti) >= before - 1e-12
    assert 0.0 <= before <= 1.0


@given(tables("a"), tables("b"))
def test_column_sim_symmetric(a, b):
    for c in range(a.n_t):
        for d in range(b.n_t):
            x = column_sim(a, c, b, d, ti)
            assert x == column_sim(b, d, a, c, ti)
            assert 0.0 <= x <= 1.0 + 1e-12


# --- model ---------------------------------------------------------------------------


@given(st.dictionaries(st.tuples(st.integers(0, 2), st.integers(0, 5)), st.floats(0, 1), max_size=12))
def test_nsim_bounded(sims):
    got = normalized_sim(sims)
    for a in {a for a, _ in sims}:
        assert sum(v for (x, _), v in got.items() if x == a) <= 1.0


@given(st.floats(0, 1), st.floats(0, 1), st.booleans(), st.booleans(), labels_for(3), labels_for(3), st.floats(0, 5))
def test_edge_potential_symmetric(n1, n2, g1, g2, la, lb, w_e):
    e = Edge((0, 0), (1, 0), n1, n2, g1, g2)
    flipped = Edge((1, 0), (0, 0), n2, n1, g2, g1)
    assert edge_potential(e, la, lb, w_e) == edge_potential(flipped, lb, la, w_e)
    if la != lb or la == NR:
        assert edge_potential(e, la, lb, w_e) == 0.0


@given(st.integers(1, 3), st.data())
def test_objective_finite_iff_feasible(q, data):
    sizes = data.draw(st.lists(st.integers(1, 3), min_size=1, max_size=3))
    theta = [np.zeros((n, q + 2)) for n in sizes]
    m = 2 if q >= 2 else 1
    model = Model(q, m, [f"t{i}" for i in range(len(sizes))], theta)
    y = {f"t{i}": tuple(data.draw(labels_for(q)) for _ in range(n)) for i, n in enumerate(sizes)}
    feasible = all(check_constraints(y[tid], q, m) for tid in y)
    assert math.isfinite(objective(model, y)) == feasible


# --- flow / infer ------------------------------------------------------------------------


WEIGHTS = arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 4)), elements=st.floats(-5, 5, width=32))


@settings(max_examples=60)
@given(WEIGHTS, st.data())
def test_matching_optimal(w, data):
    lc = data.draw(st.lists(st.integers(0, 2), min_size=w.shape[0], max_size=w.shape[0]))
    rc = data.draw(st.lists(st.integers(0, 2), min_size=w.shape[1], max_size=w.shape[1]))
    res = max_weight_matching(w, lc, rc)
    assert math.isclose(res.opt, brute_matching(w, lc, rc), abs_tol=1e-6)
    for i in range(w.shape[0]):
        assert sum(f for a, _, f in res.pairs if a == i) <= lc[i]
    for j in range(w.shape[1]):
        assert sum(f for _, b, f in res.pairs if b == j) <= rc[j]


@settings(max_examples=60)
@given(st.integers(1, 3), st.integers(1, 4), st.data())
def test_max_marginals_exact(q, n, data):
    theta = data.draw(arrays(np.float64, (n, q + 2), elements=st.floats(-1, 1, width=32)))
    np.testing.assert_allclose(max_marginals(theta, q), brute_force_max_marginals(theta, q), atol=1e-9)


@given(arrays(np.float64, st.integers(1, 6), elements=st.floats(-50, 50)))
def test_confidence_is_distribution(mu):
    p = column_confidence(mu)
    assert math.isclose(p.sum(), 1.0, rel_tol=1e-9)
    assert np.all(p >= 0)


# --- answer --------------------------------------------------------------------------------


@st.composite
def labelings(draw, q=3):
    sizes = draw(st.lists(st.integers(1, 3), min_size=1, max_size=3))
    return {f"t{i}": tuple(draw(labels_for(q)) for _ in range(n)) for i, n in enumerate(sizes)}, sizes


@given(labelings(), st.data())
def test_f1_symmetric_and_bounded(pair, data):
    y, sizes = pair
    z = {tid: tuple(data.draw(labels_for(3)) for _ in labels) for tid, labels in y.items()}
    e = f1_error(y, z)
    assert e == f1_error(z, y)
    assert 0.0 <= e <= 1.0
    mapped = lambda lab: {(t, c, l) for t, ls in lab.items() for c, l in enumerate(ls) if l >= 1}  # noqa: E731
    assert (e == 0.0) == (mapped(y) == mapped(z))


@given(st.lists(tables(min_rows=1), min_size=1, max_size=3), st.data())
def test_consolidation_traceable(ts, data):
    ts = [WebTable(f"t{i}", "u", [], t.header, t.body, []) for i, t in enumerate(ts)]
    q = 2
    y = {}
    for t in ts:
        if data.draw(st.booleans()):
            y[t.id] = (NR,) * t.n_t
        else:
            order = data.draw(st.permutations([1, 2] + [NA] * t.n_t))
            y[t.id] = tuple(order[: t.n_t])
    ans = consolidate(ts, y, ["a", "b"])
    by_id = {t.id: t for t in ts}
    relevant = sum(len(t.body) for t in ts if any(l != NR for l in y[t.id]))
    assert len(ans.rows) <= relevant
    for row in ans.rows:
        assert row.sources and all(any(l != NR for l in y[tid]) for tid, _ in row.sources)
        for l, (cell, src) in enumerate(zip(row.cells, row.cell_sources)):
            if cell.strip():
                tid, r, c = src
                assert by_id[tid].body[r][c] == cell
                assert y[tid][c] == l + 1
