"""
Slice costs on a small cluster
==============================

How the per-node completion time of a task slice depends on the slice
size, and why nodes close to saturation are avoided.
"""

# %%
# Two schedulers sharing three nodes
# ----------------------------------

import numpy as np

from schedsim import model

cluster = model.ClusterSpec.uniform([0.3, 0.25, 0.2], n=2, delay=0.5, bandwidth=1e5)
state = model.SystemState(cluster, model.WorkloadSpec([0.6, 0.4], rho=0.5))
print("arrival rates:", state.lam)

alloc = model.uniform_allocation(state.n, state.m)
print("stable under uniform split:", model.check_stability(state, alloc).ok)

# %%
# What scheduler 0 sees
# ---------------------
# Node capacity left over once scheduler 1's traffic is served.

mu_0 = model.available_capacity(state, alloc, 0)
print("capacity left for scheduler 0:", mu_0)
print("slice costs:", model.row_costs(state, alloc, 0))
print("response time (slowest slice):", model.response_time(state, alloc, 0))

# %%
# Cost as the slice grows
# -----------------------
# The queueing term explodes as lam * a approaches the available capacity.

lam = state.lam[0]
for frac in (0.0, 0.25, 0.5, 0.75, 0.9, 0.99):
    a = frac * min(1.0, mu_0[2] / lam)
    print(f"a={a:.3f}  cost={model.slice_cost(a, mu_0[2], lam, 0.5, state.b, 1e5):9.3f}")
