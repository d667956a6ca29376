"""Inference over the column-mapping model.

* ``independent``: exact per-table MAP without edges, by capacitated matching.
* ``table-centric``: max-marginals, neighbour messages, then re-matching.
* ``alpha-expansion``: graph-cut moves with a group-constrained min cut.
* ``brute-force``: exhaustive search, for testing small models.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .flow import FlowGraph, constrained_min_cut, max_weight_matching, residual_distances
from .labels import NA, NR, Labeling, all_labels, label_index
from .model import Model, _must_min, _mutex_all_irr, edge_potential, objective, table_score

ALGORITHMS = ("independent", "table-centric", "alpha-expansion", "brute-force")


class InstanceTooLarge(ValueError):
    pass


def label_table_independent(theta: np.ndarray, q: int, m: int) -> tuple[int, ...]:
    """Best constraint-feasible labeling of one table from node potentials alone.

    Columns are matched to labels ``1..q, NA``; label 1 gets a bonus large
    enough to force it into any optimum and ``NA`` takes at most
    ``n_t - m`` columns. The matched labeling is compared with all-nr and
    the better one returned.
    """
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[0]
    all_nr = (NR,) * n
    if n < m or q + max(0, n - m) < n:
        return all_nr
    bonus = 1.0 + float(np.abs(theta).sum())
    w = theta[:, : q + 1].copy()
    w[:, 0] += bonus
    res = max_weight_matching(w, [1] * n, [1] * q + [max(0, n - m)])
    labels = [NR] * n
    for c, j, _ in res.pairs:
        labels[c] = NA if j == q else j + 1
    labels = tuple(labels)
    if NR in labels or not _must_min(labels, m):
        return all_nr
    if table_score(theta, labels, q) >= table_score(theta, all_nr, q):
        return labels
    return all_nr


def max_marginals(theta: np.ndarray, q: int) -> np.ndarray:
    """mu[c, j]: best table score with column c pinned to label j, under mutex and all-irrelevant only.

    One matching of columns to ``1..q, NA`` (NA capacity n_t), then a
    Bellman-Ford pass from every label node of the residual graph: forcing
    (c, l) costs the shortest residual path from l back to c plus the edge
    cost of (c, l).
    """
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[0]
    w = theta[:, : q + 1]
    res = max_weight_matching(w, [1] * n, [1] * q + [n])
    mu = np.empty((n, q + 2))
    matched = {c: j for c, j, _ in res.pairs}
    for j in range(q + 1):
        dist = residual_distances(res.residual, res.right_nodes[j])
        for c in range(n):
            if matched.get(c) == j:
                mu[c, j] = res.opt
            else:
                d = dist[res.left_nodes[c]]
                mu[c, j] = -math.inf if d == math.inf else res.opt - d + w[c, j]
    mu[:, q + 1] = theta[:, q + 1].sum()
    return mu


def column_confidence(mu: np.ndarray) -> np.ndarray:
    """Softmax over labels; -inf entries get probability 0."""
    mu = np.asarray(mu, dtype=float)
    finite = np.isfinite(mu)
    out = np.zeros_like(mu)
    z = mu[finite] - mu[finite].max()
    e = np.exp(z)
    out[finite] = e / e.sum()
    return out


def column_confidences(model: Model) -> list[np.ndarray]:
    return [
        np.apply_along_axis(column_confidence, 1, max_marginals(th, model.q))
        for th in model.theta
    ]


def relevance_probabilities(model: Model) -> dict[str, float]:
    """1 - mean probability of nr over a table's columns."""
    return {
        tid: float(1.0 - p[:, model.q + 1].mean())
        for tid, p in zip(model.table_ids, column_confidences(model))
    }


def independent(model: Model) -> Labeling:
    return {
        tid: label_table_independent(th, model.q, model.m)
        for tid, th in zip(model.table_ids, model.theta)
    }


def messages(model: Model, probs: list[np.ndarray]) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Neighbour messages per column and label, plus which columns received any.

    Only gated (confident) neighbours send; nr never receives a message.
    """
    q = model.q
    msg = [np.zeros_like(th) for th in model.theta]
    got = [np.zeros(th.shape[0], dtype=bool) for th in model.theta]
    for e in model.edges:
        (i, c), (j, d) = e.a, e.b
        if e.gate_b and e.nsim_ab > 0:
            msg[i][c, : q + 1] += model.w_e * e.nsim_ab * probs[j][d, : q + 1]
            got[i][c] = True
        if e.gate_a and e.nsim_ba > 0:
            msg[j][d, : q + 1] += model.w_e * e.nsim_ba * probs[i][c, : q + 1]
            got[j][d] = True
    return msg, got


def table_centric(model: Model) -> Labeling:
    probs = column_confidences(model)
    msg, got = messages(model, probs)
    out = {}
    for tid, th, mg, g in zip(model.table_ids, model.theta, msg, got):
        boosted = th.copy()
        boosted[g] = np.maximum(th[g], mg[g])
        out[tid] = label_table_independent(boosted, model.q, model.m)
    return out


# --- alpha expansion -----------------------------------------------------------


@dataclass
class ExpansionResult:
    labeling: Labeling
    raw: Labeling
    trace: list[float] = field(default_factory=list)
    rounds: int = 0
    moves: int = 0


def _expansion_move(model: Model, y: list[list[int]], alpha: int, big: float) -> list[list[int]]:
    q = model.q
    a_idx = label_index(alpha, q)
    blocked = {i for i, row in enumerate(y) if alpha >= 1 and alpha in row}
    node = {}
    for i, row in enumerate(y):
        if i in blocked:
            continue
        for c, l in enumerate(row):
            if l != alpha:
                node[i, c] = len(node) + 2
    if not node:
        return y
    g = FlowGraph(len(node) + 2)
    s, t = 0, 1
    unary = {v: 0.0 for v in node.values()}  # cost(switch) - cost(keep)
    for (i, c), v in node.items():
        unary[v] += model.theta[i][c, label_index(y[i][c], q)] - model.theta[i][c, a_idx]

    def add_pair(a, b, V):
        va, vb = node.get(a), node.get(b)
        ya, yb = y[a[0]][a[1]], y[b[0]][b[1]]
        if va is None and vb is None:
            return
        if va is None:
            unary[vb] += V(ya, alpha) - V(ya, yb)
            return
        if vb is None:
            unary[va] += V(alpha, yb) - V(ya, yb)
            return
        A, B, C, D = V(ya, yb), V(ya, alpha), V(alpha, yb), V(alpha, alpha)
        extra = B + C - A - D
        if extra < -1e-9:
            raise AssertionError("non-submodular expansion term")
        unary[va] += C - A
        unary[vb] += D - C
        if extra > 0:
            g.add_edge(va, vb, extra)

    for e in model.edges:
        strength = model.w_e * e.strength()
        if strength > 0:
            add_pair(e.a, e.b, lambda la, lb, k=strength: -k if (la == lb and la != NR) else 0.0)
    for i, row in enumerate(y):
        for c, d in itertools.combinations(range(len(row)), 2):
            add_pair((i, c), (i, d), lambda la, lb: big if (la == NR) != (lb == NR) else 0.0)

    for v, k in unary.items():
        if k > 0:
            g.add_edge(s, v, k)
        elif k < 0:
            g.add_edge(v, t, -k)

    groups = []
    if alpha >= 1:
        by_table: dict[int, list[int]] = {}
        for (i, _), v in node.items():
            by_table.setdefault(i, []).append(v)
        groups = [by_table[i] for i in sorted(by_table)]
    switch = constrained_min_cut(g, s, t, groups)
    new = [list(row) for row in y]
    for (i, c), v in node.items():
        if v in switch:
            new[i][c] = alpha
    return new


def _as_labeling(model: Model, y: list[list[int]]) -> Labeling:
    return {tid: tuple(row) for tid, row in zip(model.table_ids, y)}


def expansion(model: Model, max_rounds: int = 100) -> ExpansionResult:
    """Alpha-expansion from all-na over the relaxed objective, then constraint repair."""
    q = model.q
    y = [[NA] * model.n_cols(i) for i in range(len(model.table_ids))]
    big = 1.0 + 2.0 * (
        sum(float(np.abs(th).sum()) for th in model.theta)
        + sum(model.w_e * e.strength() for e in model.edges)
    )
    current = objective(model, _as_labeling(model, y), relaxed=True)
    trace = [current]
    order = [NA, NR] + list(range(1, q + 1))
    rounds = moves = 0
    changed = True
    while changed and rounds < max_rounds:
        changed = False
        rounds += 1
        for alpha in order:
            cand = _expansion_move(model, y, alpha, big)
            val = objective(model, _as_labeling(model, cand), relaxed=True)
            if val > current + 1e-9:
                y, current = cand, val
                trace.append(val)
                moves += 1
                changed = True
    raw = _as_labeling(model, y)
    final = dict(raw)
    for i, tid in enumerate(model.table_ids):
        if not _must_min(final[tid], model.m):
            final[tid] = label_table_independent(model.theta[i], q, model.m)
    return ExpansionResult(final, raw, trace, rounds, moves)


def alpha_expansion(model: Model) -> Labeling:
    return expansion(model).labeling


# --- exhaustive oracle ------------------------------------------------------------


def feasible_table_labelings(n: int, q: int, m: int) -> list[tuple[int, ...]]:
    """Every constraint-feasible labeling of an n-column table, in label-index order."""
    choices = all_labels(q)[:-1]
    out = [
        labels
        for labels in itertools.product(choices, repeat=n)
        if _mutex_all_irr(labels, q) and _must_min(labels, m)
    ]
    out.append((NR,) * n)
    return sorted(out, key=lambda ls: [label_index(l, q) for l in ls])


def brute_force_max_marginals(theta: np.ndarray, q: int) -> np.ndarray:
    """Exhaustive max-marginals under mutex and all-irrelevant."""
    theta = np.asarray(theta, dtype=float)
    n = theta.shape[0]
    mu = np.full((n, q + 2), -math.inf)
    for labels in itertools.product(all_labels(q)[:-1], repeat=n):
        if not _mutex_all_irr(labels, q):
            continue
        val = table_score(theta, labels, q)
        for c, l in enumerate(labels):
            j = label_index(l, q)
            mu[c, j] = max(mu[c, j], val)
    mu[:, q + 1] = theta[:, q + 1].sum()
    return mu


def brute_force_map(model: Model, max_columns: int = 12) -> Labeling:
    """Exact argmax of the full objective; ties go to the lexicographically smallest labeling."""
    if model.n_variables > max_columns:
        raise InstanceTooLarge(
            f"{model.n_variables} columns exceed the brute-force limit of {max_columns}"
        )
    q = model.q
    per_table = [feasible_table_labelings(model.n_cols(i), q, model.m) for i in range(len(model.table_ids))]
    node_vals = [
        [table_score(model.theta[i], ls, q) for ls in opts] for i, opts in enumerate(per_table)
    ]
    best, best_val = None, -math.inf
    for combo in itertools.product(*[range(len(o)) for o in per_table]):
        rows = [per_table[i][k] for i, k in enumerate(combo)]
        val = sum(node_vals[i][k] for i, k in enumerate(combo))
        for e in model.edges:
            val += edge_potential(e, rows[e.a[0]][e.a[1]], rows[e.b[0]][e.b[1]], model.w_e)
        if val > best_val:
            best, best_val = rows, val
    return {tid: tuple(r) for tid, r in zip(model.table_ids, best)}


def infer(model: Model, algo: str = "table-centric") -> Labeling:
    if algo == "independent":
        return independent(model)
    if algo == "table-centric":
        return table_centric(model)
    if algo == "alpha-expansion":
        return alpha_expansion(model)
    if algo == "brute-force":
        return brute_force_map(model)
    raise ValueError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")
