"""The flow machinery underneath the column mapper."""

import numpy as np

from tablequery.flow import FlowGraph, constrained_min_cut, cut_weight, max_weight_matching

# Query columns on the left, table columns on the right.
w = np.array([
    [0.9, 0.1, 0.0],
    [0.2, 0.8, 0.3],
])
res = max_weight_matching(w)
print("pairs", res.pairs, "total", res.opt)

# Capacities: the right-hand "na" slot may absorb two table columns.
w2 = np.array([[0.9, 0.0], [0.7, 0.0], [0.1, 0.0]])
print(max_weight_matching(w2, [1, 1, 1], [1, 2]).pairs)

# A cut where nodes 2 and 3 may not both end up on the sink side.
g = FlowGraph(5)
s, t = 0, 1
for v in (2, 3, 4):
    g.add_edge(s, v, 1.0)
    g.add_edge(v, t, 3.0)
g.add_edge(2, 4, 0.5)
side = constrained_min_cut(g, s, t, [[2, 3]])
print("sink side", sorted(side), "weight", cut_weight(g, side, t))
