"""Flow-network primitives.

Successive-shortest-path min-cost max-flow (Bellman-Ford, since residual
costs go negative), capacity-constrained max-weight bipartite matching,
residual shortest distances, and a min s-t cut that allows at most one
t-side vertex per vertex group.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

INF = math.inf
EPS = 1e-12


class NegativeCycleError(RuntimeError):
    """The residual graph holds a negative-cost cycle."""


class FlowGraph:
    """Directed graph with paired residual edges.

    Edge ``e`` and its reverse ``e ^ 1`` are stored side by side. The reverse
    edge has capacity 0, cost ``-cost(e)`` and flow ``-flow(e)``.
    """

    def __init__(self, n_nodes: int = 0):
        self.adj: list[list[int]] = [[] for _ in range(n_nodes)]
        self.src: list[int] = []
        self.dst: list[int] = []
        self.cap: list[float] = []
        self.cost: list[float] = []
        self.flow: list[float] = []

    @property
    def n_nodes(self) -> int:
        return len(self.adj)

    def add_node(self) -> int:
        self.adj.append([])
        return len(self.adj) - 1

    def add_edge(self, u: int, v: int, cap: float, cost: float = 0.0) -> int:
        if cap < 0:
            raise ValueError("capacity must be nonnegative")
        e = len(self.src)
        for a, b, c, k in ((u, v, cap, cost), (v, u, 0.0, -cost)):
            self.src.append(a)
            self.dst.append(b)
            self.cap.append(c)
            self.cost.append(k)
            self.flow.append(0.0)
            self.adj[a].append(len(self.src) - 1)
        return e

    def residual(self, e: int) -> float:
        return self.cap[e] - self.flow[e]

    def push(self, e: int, amount: float) -> None:
        self.flow[e] += amount
        self.flow[e ^ 1] -= amount

    def forward_edges(self) -> range:
        return range(0, len(self.src), 2)

    def find_edge(self, u: int, v: int) -> int | None:
        for e in self.adj[u]:
            if e % 2 == 0 and self.dst[e] == v:
                return e
        return None

    def copy(self) -> "FlowGraph":
        g = FlowGraph()
        g.adj = [list(a) for a in self.adj]
        g.src = list(self.src)
        g.dst = list(self.dst)
        g.cap = list(self.cap)
        g.cost = list(self.cost)
        g.flow = list(self.flow)
        return g

    def total_cost(self) -> float:
        return sum(self.cost[e] * self.flow[e] for e in self.forward_edges())

    def check_invariants(self, s: int, t: int, tol: float = 1e-9) -> None:
        """Raise AssertionError on a capacity or conservation violation."""
        balance = [0.0] * self.n_nodes
        for e in self.forward_edges():
            assert -tol <= self.flow[e] <= self.cap[e] + tol, e
            assert self.flow[e ^ 1] == -self.flow[e]
            balance[self.src[e]] -= self.flow[e]
            balance[self.dst[e]] += self.flow[e]
        for v, b in enumerate(balance):
            if v not in (s, t):
                assert abs(b) <= tol, (v, b)


def bellman_ford(g: FlowGraph, source: int) -> tuple[list[float], list[int]]:
    """Shortest residual-cost distances from ``source``.

    Only edges with positive residual capacity are traversed. Returns the
    distance list (``inf`` when unreachable) and the predecessor edge per node.
    """
    n = g.n_nodes
    dist = [INF] * n
    parent = [-1] * n
    dist[source] = 0.0
    edges = [e for e in range(len(g.src)) if g.residual(e) > EPS]
    for _ in range(n - 1):
        changed = False
        for e in edges:
            du = dist[g.src[e]]
            if du == INF:
                continue
            nd = du + g.cost[e]
            v = g.dst[e]
            if nd < dist[v] - EPS:
                dist[v] = nd
                parent[v] = e
                changed = True
        if not changed:
            return dist, parent
    for e in edges:
        du = dist[g.src[e]]
        if du != INF and du + g.cost[e] < dist[g.dst[e]] - 1e-9:
            raise NegativeCycleError("negative-cost cycle in residual graph")
    return dist, parent


def _path_edges(g: FlowGraph, parent: list[int], t: int) -> list[int]:
    path = []
    v = t
    while parent[v] != -1:
        e = parent[v]
        path.append(e)
        v = g.src[e]
    path.reverse()
    return path


class FlowResult(NamedTuple):
    value: float
    cost: float
    residual: FlowGraph


def min_cost_max_flow(g: FlowGraph, s: int, t: int) -> FlowResult:
    """Maximum s-t flow of minimum cost, by successive shortest paths.

    ``g`` is mutated in place and returned as the residual graph.
    """
    value = 0.0
    cost = 0.0
    while True:
        dist, parent = bellman_ford(g, s)
        if dist[t] == INF:
            break
        path = _path_edges(g, parent, t)
        push = min(g.residual(e) for e in path)
        if push == INF:
            raise ValueError("unbounded flow: s-t path of infinite capacity")
        for e in path:
            g.push(e, push)
        value += push
        cost += push * dist[t]
    return FlowResult(value, cost, g)


def max_flow(g: FlowGraph, s: int, t: int) -> float:
    """Edmonds-Karp augmentation; the unit-cost case of successive shortest paths.

    Mutates ``g``. Returns the amount of flow added.
    """
    added = 0.0
    n = g.n_nodes
    while True:
        parent = [-1] * n
        seen = [False] * n
        seen[s] = True
        queue = deque([s])
        while queue and not seen[t]:
            u = queue.popleft()
            for e in g.adj[u]:
                v = g.dst[e]
                if not seen[v] and g.residual(e) > EPS:
                    seen[v] = True
                    parent[v] = e
                    queue.append(v)
        if not seen[t]:
            return added
        path = _path_edges(g, parent, t)
        push = min(g.residual(e) for e in path)
        if push == INF:
            raise ValueError("unbounded flow: s-t path of infinite capacity")
        for e in path:
            g.push(e, push)
        added += push


def reaches(g: FlowGraph, target: int) -> set[int]:
    """Nodes with a positive-residual path to ``target``."""
    into: list[list[int]] = [[] for _ in range(g.n_nodes)]
    for e in range(len(g.src)):
        if g.residual(e) > EPS:
            into[g.dst[e]].append(g.src[e])
    seen = {target}
    stack = [target]
    while stack:
        v = stack.pop()
        for u in into[v]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return seen


def residual_distances(g: FlowGraph, source: int) -> list[float]:
    """Bellman-Ford distances over positive-residual edges; ``inf`` if unreachable."""
    return bellman_ford(g, source)[0]


@dataclass
class MatchingResult:
    """Optimal capacitated matching plus the residual graph that produced it.

    ``pairs`` holds ``(left, right, multiplicity)`` in left/right index space.
    """

    pairs: list[tuple[int, int, int]]
    opt: float
    residual: FlowGraph
    left_nodes: list[int]
    right_nodes: list[int]
    source: int
    sink: int
    dummy: int | None = None
    edge_of: dict[tuple[int, int], int] = field(default_factory=dict)

    def partner(self, u: int) -> int | None:
        """Right index matched to left index ``u`` (first one, for capacity > 1)."""
        for a, b, _ in self.pairs:
            if a == u:
                return b
        return None


def max_weight_matching(
    weights: Sequence[Sequence[float]] | np.ndarray,
    left_caps: Sequence[int] | None = None,
    right_caps: Sequence[int] | None = None,
) -> MatchingResult:
    """Max-weight capacitated bipartite matching via min-cost max-flow.

    The side with less total capacity gets a dummy node absorbing the
    difference, so the deficient side is always fully matched. Edge
    capacities are ``min(c_u, c_v)``; real edges cost ``-w(u, v)``, dummy
    edges cost 0.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2:
        raise ValueError("weights must be a 2-D array")
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    n_left, n_right = w.shape
    lc = [1] * n_left if left_caps is None else [int(c) for c in left_caps]
    rc = [1] * n_right if right_caps is None else [int(c) for c in right_caps]
    if len(lc) != n_left or len(rc) != n_right:
        raise ValueError("capacity lists do not match the weight matrix")
    if min(lc + rc, default=0) < 0:
        raise ValueError("capacities must be nonnegative")

    g = FlowGraph()
    s, t = g.add_node(), g.add_node()
    left = [g.add_node() for _ in range(n_left)]
    right = [g.add_node() for _ in range(n_right)]
    deficit = sum(rc) - sum(lc)
    dummy = g.add_node() if deficit != 0 else None

    for u, c in zip(left, lc):
        g.add_edge(s, u, c)
    for v, c in zip(right, rc):
        g.add_edge(v, t, c)
    edge_of = {}
    for i, u in enumerate(left):
        for j, v in enumerate(right):
            cap = min(lc[i], rc[j])
            if cap > 0:
                edge_of[i, j] = g.add_edge(u, v, cap, -w[i, j])
    if dummy is not None:
        if deficit > 0:
            g.add_edge(s, dummy, deficit)
            for j, v in enumerate(right):
                if min(deficit, rc[j]) > 0:
                    g.add_edge(dummy, v, min(deficit, rc[j]))
        else:
            g.add_edge(dummy, t, -deficit)
            for i, u in enumerate(left):
                if min(-deficit, lc[i]) > 0:
                    g.add_edge(u, dummy, min(-deficit, lc[i]))

    min_cost_max_flow(g, s, t)
    pairs = []
    opt = 0.0
    for (i, j), e in edge_of.items():
        f = int(round(g.flow[e]))
        if f > 0:
            pairs.append((i, j, f))
            opt += f * w[i, j]
    return MatchingResult(pairs, opt, g, left, right, s, t, dummy, edge_of)


def cut_weight(g: FlowGraph, t_side: Iterable[int], t: int) -> float:
    """Total original capacity of edges leaving the s side for the t side."""
    tset = set(t_side) | {t}
    return sum(
        g.cap[e]
        for e in g.forward_edges()
        if g.src[e] not in tset and g.dst[e] in tset
    )


def _force_to_source(g: FlowGraph, s: int, nodes: Iterable[int]) -> None:
    for u in nodes:
        e = g.find_edge(s, u)
        if e is None:
            g.add_edge(s, u, INF)
        else:
            g.cap[e] = INF


def constrained_min_cut(
    g: FlowGraph, s: int, t: int, groups: Sequence[Iterable[int]]
) -> set[int]:
    """Approximate min s-t cut with at most one t-side vertex per group.

    Starts from the unconstrained max-flow cut. While some group has several
    t-side members, it tries, for every violated group and every member ``v``,
    pinning the other members to the source with infinite capacity, measures
    the extra flow that would cost, and commits the cheapest choice (lowest
    group index, then lowest vertex id, on ties). Trial flows run on scratch
    copies. ``g`` itself is not modified.

    Returns the non-terminal vertices on the t side.
    """
    groups = [sorted(set(grp)) for grp in groups]
    seen: set[int] = set()
    for grp in groups:
        if seen & set(grp):
            raise ValueError("groups must be disjoint")
        if s in grp or t in grp:
            raise ValueError("terminals cannot belong to a group")
        seen |= set(grp)

    work = g.copy()
    max_flow(work, s, t)

    def t_side() -> set[int]:
        return reaches(work, t) - {s, t}

    side = t_side()
    while True:
        violated = [
            (i, sorted(side & set(grp)))
            for i, grp in enumerate(groups)
            if len(side & set(grp)) > 1
        ]
        if not violated:
            return side
        best = None
        for i, members in violated:
            for v in members:
                trial = work.copy()
                _force_to_source(trial, s, [u for u in members if u != v])
                extra = max_flow(trial, s, t)
                if best is None or extra < best[0] - EPS:
                    best = (extra, i, v, members)
        _, _, v_star, members = best
        _force_to_source(work, s, [u for u in members if u != v_star])
        max_flow(work, s, t)
        side = t_side()
