import math

import numpy as np
import pytest

from tablequery.flow import (
    FlowGraph,
    NegativeCycleError,
    bellman_ford,
    constrained_min_cut,
    cut_weight,
    max_flow,
    max_weight_matching,
    min_cost_max_flow,
    residual_distances,
)

from oracles import brute_constrained_cut, brute_matching, random_cut_instance


def test_single_negative_edge():
    g = FlowGraph(2)
    g.add_edge(0, 1, 1, -5)
    res = min_cost_max_flow(g, 0, 1)
    assert res.value == 1
    assert res.cost == -5


def test_two_parallel_paths():
    # s=0, t=3, paths through 1 and 2 with costs -3 and -1
    g = FlowGraph(4)
    g.add_edge(0, 1, 1, -3)
    g.add_edge(1, 3, 1, 0)
    g.add_edge(0, 2, 1, -1)
    g.add_edge(2, 3, 1, 0)
    res = min_cost_max_flow(g, 0, 3)
    assert res.value == 2
    assert res.cost == pytest.approx(-4)


def test_zero_capacity():
    g = FlowGraph(3)
    g.add_edge(0, 1, 0, -2)
    g.add_edge(1, 2, 0, 1)
    res = min_cost_max_flow(g, 0, 2)
    assert (res.value, res.cost) == (0, 0)


def test_cheapest_path_taken_first():
    g = FlowGraph(4)
    g.add_edge(0, 1, 2, 1)
    g.add_edge(1, 3, 1, 1)
    g.add_edge(1, 2, 2, 0)
    g.add_edge(2, 3, 2, 5)
    res = min_cost_max_flow(g, 0, 3)
    assert res.value == 2
    assert res.cost == pytest.approx(2 + 6)
    g.check_invariants(0, 3)


def test_negative_cycle_is_an_error():
    g = FlowGraph(3)
    g.add_edge(0, 1, 1, -1)
    g.add_edge(1, 2, 1, -1)
    g.add_edge(2, 0, 1, -1)
    with pytest.raises(NegativeCycleError):
        bellman_ford(g, 0)


def test_no_negative_augmenting_path_after_optimum():
    rng = np.random.default_rng(3)
    for _ in range(30):
        w = rng.uniform(-2, 2, size=(4, 5))
        res = max_weight_matching(w)
        dist, _ = bellman_ford(res.residual, res.source)
        assert dist[res.sink] == math.inf
        res.residual.check_invariants(res.source, res.sink)


@pytest.mark.parametrize(
    "w, opt, pairs",
    [
        ([[7]], 7, {(0, 0)}),
        ([[5, 1], [1, 5]], 10, {(0, 0), (1, 1)}),
        ([[5, 4], [4, 1]], 8, {(0, 1), (1, 0)}),
    ],
)
def test_matching_examples(w, opt, pairs):
    res = max_weight_matching(w)
    assert res.opt == opt
    assert {(i, j) for i, j, _ in res.pairs} == pairs


def test_matching_respects_capacities():
    w = np.array([[3.0, 1.0, 0.5], [2.0, 2.0, 0.0]])
    res = max_weight_matching(w, [2, 1], [1, 1, 3])
    used_left = [0, 0]
    used_right = [0, 0, 0]
    for i, j, f in res.pairs:
        used_left[i] += f
        used_right[j] += f
    assert used_left == [2, 1]
    assert all(u <= c for u, c in zip(used_right, [1, 1, 3]))
    assert res.opt == pytest.approx(brute_matching(w, [2, 1], [1, 1, 3]))


def test_matching_rejects_bad_input():
    with pytest.raises(ValueError):
        max_weight_matching([[math.inf]])
    with pytest.raises(ValueError):
        max_weight_matching([[1.0, 2.0]], [1], [1])


@pytest.mark.parametrize("seed", range(40))
def test_matching_against_enumeration(seed):
    rng = np.random.default_rng(seed)
    n, k = rng.integers(1, 5, size=2)
    w = rng.uniform(-3, 3, size=(n, k)).round(2)
    lc = list(rng.integers(0, 3, size=n))
    rc = list(rng.integers(0, 3, size=k))
    assert max_weight_matching(w, lc, rc).opt == pytest.approx(brute_matching(w, lc, rc), abs=1e-9)


def test_residual_distances_chain():
    g = FlowGraph(3)
    g.add_edge(0, 1, 1, -2)
    g.add_edge(1, 2, 1, 1)
    d = residual_distances(g, 0)
    assert d == [0, -2, -1]


def test_residual_distances_isolated_source():
    g = FlowGraph(3)
    g.add_edge(1, 2, 1, 1)
    assert residual_distances(g, 0) == [0, math.inf, math.inf]


def _cut_fixture():
    g = FlowGraph(6)
    s, t = 0, 1
    g.add_edge(s, 2, 1)
    g.add_edge(s, 3, 5)
    g.add_edge(2, t, 10)
    g.add_edge(3, t, 10)
    g.add_edge(s, 4, 2)
    g.add_edge(4, t, 1)
    g.add_edge(s, 5, 4)
    g.add_edge(5, t, 3)
    return g, s, t


def test_constrained_cut_forces_cheaper_vertex():
    g, s, t = _cut_fixture()
    free = constrained_min_cut(g, s, t, [])
    assert {2, 3} <= free
    side = constrained_min_cut(g, s, t, [[2, 3]])
    assert 2 in side and 3 not in side
    assert cut_weight(g, side, t) == pytest.approx(brute_constrained_cut(g, s, t, [[2, 3]]))
    # 3 on the s side cuts 3->t (10) and s->2 (1); vertices 4 and 5 add 1 + 3
    assert cut_weight(g, side, t) == pytest.approx(10 + 1 + 1 + 3)


def test_constrained_cut_satisfied_groups_unchanged():
    g, s, t = _cut_fixture()
    free = constrained_min_cut(g, s, t, [])
    assert constrained_min_cut(g, s, t, [[2, 4], [3, 5]]) == free


def test_constrained_cut_does_not_mutate_graph():
    g, s, t = _cut_fixture()
    before = list(g.flow)
    constrained_min_cut(g, s, t, [[2, 3]])
    assert list(g.flow) == before


def test_constrained_cut_rejects_overlapping_groups():
    g, s, t = _cut_fixture()
    with pytest.raises(ValueError):
        constrained_min_cut(g, s, t, [[2, 3], [3, 4]])


@pytest.mark.parametrize("seed", range(25))
def test_constrained_cut_bounds(seed):
    g, s, t, groups = random_cut_instance(np.random.default_rng(seed), max_nodes=10)
    side = constrained_min_cut(g, s, t, groups)
    assert all(len(side & set(grp)) <= 1 for grp in groups)
    work = g.copy()
    unconstrained = max_flow(work, s, t)
    weight = cut_weight(g, side, t)
    assert weight >= unconstrained - 1e-9
    assert weight <= 2 * brute_constrained_cut(g, s, t, groups) + 1e-9
