"""Labeling the columns of one table, then of several linked ones."""

import numpy as np

from tablequery.infer import alpha_expansion, brute_force_map, column_confidence, independent, max_marginals, table_centric
from tablequery.model import Edge, Model, objective

# theta[c, l]: how much column c likes query label l. Layout: labels 1..q, then na, then nr.
theta = np.array([
    [3.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 0.0, 0.0],
])
model = Model(2, 2, ["t"], [theta])
print("independent", independent(model))
print("exhaustive ", brute_force_map(model))

# Max-marginals: best score if column c is forced to label l.
mu = max_marginals(theta, 2)
print(mu)
print("confidence of column 0:", column_confidence(mu[0]).round(3))

# Swapping two labels needs two columns to move at once, which a single
# expansion move cannot do. The exact matching finds it.
trap = Model(2, 2, ["t"], [np.array([[5.0, 4.0, 0.0, -10.0], [4.0, 1.0, 0.0, -10.0]])])
for name, y in [("alpha", alpha_expansion(trap)), ("matching", independent(trap))]:
    print(name, y, objective(trap, y))

# Two tables. "b" has no header so its own evidence says irrelevant, but
# its columns share values with the confidently mapped "a".
a = np.array([[2.0, -0.5, 0.0, -1.0], [-0.5, 2.0, 0.0, -1.0]])
b = np.array([[-0.15, -0.15, 0.0, 0.2], [-0.15, -0.15, 0.0, 0.2]])
edges = [Edge((0, 0), (1, 0), 0.7, 0.7, True, True), Edge((0, 1), (1, 1), 0.7, 0.7, True, True)]
linked = Model(2, 2, ["a", "b"], [a, b], edges, 1.0)
print("independent  ", independent(linked))
print("table-centric", table_centric(linked))
