"""
Checking the queue formula by simulation
========================================

A million-job FIFO simulation against the M/G/1 mean time in system.
"""

# %%

from schedsim.queue_validator import SimSpec, simulate_queue

for kind in ("exponential", "deterministic"):
    spec = SimSpec(0.5, 1.0, kind, jobs=1_000_000, seed=0)
    res = simulate_queue(spec)
    z = (res.mean - spec.analytic_mean()) / res.stderr
    print(f"{kind:13s} analytic={spec.analytic_mean():.4f} simulated={res.mean:.4f} "
          f"+- {res.stderr:.4f}  z={z:+.2f}")

# %%
# Heavier traffic needs longer runs: correlation between successive jobs
# grows and the batch-means error widens.

for lam in (0.7, 0.9):
    res = simulate_queue(SimSpec(lam, 1.0, jobs=1_000_000))
    print(f"lam={lam}: {res.mean:.3f} +- {res.stderr:.3f} vs {SimSpec(lam, 1.0).analytic_mean():.3f}")
