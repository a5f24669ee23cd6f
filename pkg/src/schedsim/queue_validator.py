"""Monte-Carlo check of the M/G/1 mean time in system.

Single-server FIFO with Poisson arrivals. Departure times follow the
recursion ``d_k = max(t_k, d_{k-1}) + s_k``, whose closed form
``d_k = C_k + max_{l <= k}(t_l - C_{l-1})`` (``C`` the cumulative service)
lets the whole run be computed with numpy scans.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from schedsim import model

RNG_ALGORITHM = "PCG64"
SERVICE_KINDS = ("exponential", "deterministic")


@dataclass(frozen=True)
class SimSpec:
    lam: float
    mu: float
    service_kind: str = "exponential"
    jobs: int = 1_000_000
    warmup: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.service_kind not in SERVICE_KINDS:
            raise ValueError(f"service_kind must be one of {SERVICE_KINDS}")
        if not (self.lam > 0 and self.mu > 0):
            raise ValueError("rates must be positive")
        if self.lam >= self.mu:
            raise model.UnstableQueueError(f"arrival rate {self.lam:g} >= service rate {self.mu:g}")
        if self.warmup is None:
            object.__setattr__(self, "warmup", self.jobs // 10)
        if not self.jobs > self.warmup >= 0:
            raise ValueError("need jobs > warmup >= 0")

    @property
    def sigma2(self) -> float:
        return 1 / self.mu**2 if self.service_kind == "exponential" else 0.0

    def analytic_mean(self) -> float:
        return model.mg1_mean_time(self.lam, self.mu, self.sigma2)


@dataclass(frozen=True)
class SimResult:
    mean: float
    stderr: float
    n_measured: int
    n_batches: int
    rng: str = RNG_ALGORITHM


def sojourn_times(spec: SimSpec) -> np.ndarray:
    """Time in system of every simulated job, warmup included.

    Arrival gaps and service times come from separate child streams of the
    seed, so runs that differ only in ``lam`` share random numbers.
    """
    arr_ss, svc_ss = np.random.SeedSequence(spec.seed).spawn(2)
    gaps = np.random.Generator(np.random.PCG64(arr_ss)).standard_exponential(spec.jobs) / spec.lam
    if spec.service_kind == "exponential":
        service = np.random.Generator(np.random.PCG64(svc_ss)).standard_exponential(spec.jobs) / spec.mu
    else:
        service = np.full(spec.jobs, 1 / spec.mu)
    arrivals = np.cumsum(gaps)
    cum = np.cumsum(service)
    prev = np.concatenate(([0.0], cum[:-1]))
    departures = cum + np.maximum.accumulate(arrivals - prev)
    return departures - arrivals


def simulate_queue(spec: SimSpec, n_batches: int = 100) -> SimResult:
    """Post-warmup mean time in system and its batch-means standard error.

    Successive sojourn times are correlated, so the error is estimated from
    ``n_batches`` contiguous batch averages rather than from single jobs.
    """
    t = sojourn_times(spec)[spec.warmup:]
    n_batches = min(n_batches, t.size)
    usable = t.size - t.size % n_batches
    batches = t[:usable].reshape(n_batches, -1).mean(axis=1)
    stderr = batches.std(ddof=1) / np.sqrt(n_batches) if n_batches > 1 else float("nan")
    return SimResult(float(t.mean()), float(stderr), int(t.size), n_batches)
