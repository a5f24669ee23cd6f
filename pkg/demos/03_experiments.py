"""
The reference experiments
=========================

PS, BS and GS on the built-in clusters, then the load and bandwidth sweeps.
Takes about a minute.
"""

# %%
# Single scenarios
# ----------------

import numpy as np

from schedsim import experiments

for name in ("exp1", "exp2"):
    rep = experiments.run_scenario(experiments.builtin_scenarios()[name])
    for algo, out in rep.outcomes.items():
        print(f"{name} {algo}: response times {np.round(out.response_time, 4)}  FI={out.fairness:.4f}")

# %%
# Load sweep
# ----------
# PS keeps the first scheduler ahead of BS at every load.

sweeps = experiments.builtin_sweeps()
for rep in experiments.run_sweep(sweeps["load"]):
    print(f"rho={rep.sweep_value:.1f}  PS={rep['PS'].objective[0]:.4f}  BS={rep['BS'].objective[0]:.4f}")

# %%
# Bandwidth sweep
# ---------------

for rep in experiments.run_sweep(sweeps["bandwidth"]):
    print(f"{rep.sweep_value:5d} Kbps  " + "  ".join(
        f"{a}={rep[a].objective.mean():.3f}" for a in ("PS", "BS", "GS")))
