"""
Smoothing the max
=================

The slowest-slice objective is nonsmooth. A weighted log-sum-exp stands in
for it, and the row solver tightens the approximation step by step.
"""

# %%
# The smoothed max and its bounds
# -------------------------------

import numpy as np

from schedsim import entropy_solver as es
from schedsim import model, oracle

f = np.array([1.0, 2.0, 1.5])
w = es.uniform_weights(3)
for p in (1, 10, 100, 1000):
    print(f"p={p:5d}  smoothed={es.entropy_value(f, w, p):.6f}  max={f.max()}")

# %%
# Reweighting
# -----------
# Weights drift toward the costliest component, so a modest p already gives
# a tight fit.

for _ in range(3):
    w = es.update_weights(w, f, 10)
    print(np.round(w, 6), es.entropy_value(f, w, 10))

# %%
# Solving one row against the grid oracle
# ---------------------------------------

cluster = model.ClusterSpec(np.array([0.8, 0.5]), np.array([[0.2, 0.6]]), np.array([[2e5, 5e5]]))
state = model.SystemState.from_arrival_rates(cluster, [0.3], 1e6)
ctx = es.RowContext.from_state(state, model.uniform_allocation(1, 2), 0)
res = es.solve_minimax_row(np.full(2, 0.5), ctx)
row, best = oracle.oracle_minimax(state)
print("solver:", res.x, res.value, "outer iterations:", res.n_outer)
print("oracle:", row, best)
