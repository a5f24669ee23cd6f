"""System model: clusters of M/G/1 nodes fed by slicing schedulers.

All quantities are SI: seconds, jobs/second, bits and bits/second.
Node service is exponential everywhere except :func:`mg1_mean_time`,
which keeps the service-time variance explicit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Relative margin kept between a scheduler's offered rate and the node
#: capacity left to it, so costs stay finite during optimisation.
STABILITY_MARGIN = 1e-6

#: Tolerance on the row sums of an allocation matrix.
ROW_SUM_TOL = 1e-9

MEGABIT = 1e6
KBPS = 1e3


class UnstableQueueError(ValueError):
    """Raised when an offered rate reaches or exceeds a service rate."""


class InfeasibleStateError(ValueError):
    """Raised when the capacity left to a scheduler is not positive."""


def _frozen(x, ndim: int, name: str) -> np.ndarray:
    arr = np.array(x, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ClusterSpec:
    """Computing nodes and the links reaching them.

    Parameters
    ----------
    mu : array_like, shape (m,)
        Mean service rate of each node, jobs/second.
    delay : array_like, shape (n, m)
        Fixed transmission delay from scheduler ``i`` to node ``j``, seconds.
    bandwidth : array_like, shape (n, m)
        Link bandwidth from scheduler ``i`` to node ``j``, bits/second.
    """

    mu: np.ndarray
    delay: np.ndarray
    bandwidth: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu", _frozen(self.mu, 1, "mu"))
        object.__setattr__(self, "delay", _frozen(self.delay, 2, "delay"))
        object.__setattr__(self, "bandwidth", _frozen(self.bandwidth, 2, "bandwidth"))
        if self.mu.size < 1:
            raise ValueError("need at least one computing node")
        if np.any(self.mu <= 0):
            raise ValueError("service rates must be positive")
        if self.delay.shape != self.bandwidth.shape or self.delay.shape[1] != self.m:
            raise ValueError(
                f"delay {self.delay.shape} and bandwidth {self.bandwidth.shape} "
                f"must both be (n, {self.m})"
            )
        if np.any(self.delay < 0):
            raise ValueError("delays must be nonnegative")
        if np.any(self.bandwidth <= 0):
            raise ValueError("bandwidths must be positive")

    @property
    def m(self) -> int:
        return self.mu.size

    @property
    def n_links(self) -> int:
        """Number of scheduler rows the link matrices were built for."""
        return self.delay.shape[0]

    @classmethod
    def uniform(cls, mu, n: int, delay: float = 0.5, bandwidth: float = 100 * KBPS):
        """Cluster whose links all share one delay and one bandwidth."""
        mu = np.asarray(mu, dtype=float)
        shape = (n, mu.size)
        return cls(mu, np.full(shape, float(delay)), np.full(shape, float(bandwidth)))

    def __eq__(self, other):
        if not isinstance(other, ClusterSpec):
            return NotImplemented
        return (
            np.array_equal(self.mu, other.mu)
            and np.array_equal(self.delay, other.delay)
            and np.array_equal(self.bandwidth, other.bandwidth)
        )


@dataclass(frozen=True, eq=False)
class WorkloadSpec:
    """Job streams entering the schedulers.

    ``phi`` holds relative arrival rates, ``rho`` the target system load and
    ``b`` the mean task length in bits.
    """

    phi: np.ndarray
    rho: float
    b: float = MEGABIT

    def __post_init__(self):
        object.__setattr__(self, "phi", _frozen(self.phi, 1, "phi"))
        if self.phi.size < 1:
            raise ValueError("need at least one scheduler")
        if np.any(self.phi <= 0):
            raise ValueError("relative arrival rates must be positive")
        if not 0 < self.rho < 1:
            raise ValueError(f"system load must lie in (0, 1), got {self.rho}")
        if not self.b > 0:
            raise ValueError("task length must be positive")

    @property
    def n(self) -> int:
        return self.phi.size

    def __eq__(self, other):
        if not isinstance(other, WorkloadSpec):
            return NotImplemented
        return (
            np.array_equal(self.phi, other.phi)
            and self.rho == other.rho
            and self.b == other.b
        )


def arrival_rates(workload: WorkloadSpec, cluster: ClusterSpec) -> np.ndarray:
    """Absolute arrival rate of each scheduler, ``phi_i * rho * sum(mu)``.

    The relative rates are used as given; they are not renormalised.
    """
    return workload.phi * workload.rho * cluster.mu.sum()


@dataclass(frozen=True, eq=False)
class SystemState:
    """A cluster together with the arrival rates loading it."""

    cluster: ClusterSpec
    workload: WorkloadSpec
    lam: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.lam is None:
            lam = arrival_rates(self.workload, self.cluster)
        else:
            lam = self.lam
        object.__setattr__(self, "lam", _frozen(lam, 1, "lam"))
        if self.lam.size != self.workload.n:
            raise ValueError("one arrival rate per scheduler expected")
        if self.cluster.n_links != self.n:
            raise ValueError(
                f"link matrices cover {self.cluster.n_links} schedulers, workload has {self.n}"
            )
        if np.any(self.lam <= 0):
            raise ValueError("arrival rates must be positive")
        if self.lam.sum() >= self.cluster.mu.sum():
            raise UnstableQueueError(
                f"total arrival rate {self.lam.sum():g} reaches total service "
                f"rate {self.cluster.mu.sum():g}"
            )

    @classmethod
    def from_arrival_rates(cls, cluster: ClusterSpec, lam, b: float = MEGABIT):
        """Build a state from absolute rates instead of the load law.

        The implied workload has ``rho = sum(lam) / sum(mu)`` and
        ``phi = lam / sum(lam)``, which maps back onto ``lam``.
        """
        lam = np.asarray(lam, dtype=float)
        rho = lam.sum() / cluster.mu.sum()
        if not 0 < rho < 1:
            raise UnstableQueueError(f"implied system load {rho:g} outside (0, 1)")
        return cls(cluster, WorkloadSpec(lam / lam.sum(), rho, b), lam)

    @property
    def n(self) -> int:
        return self.workload.n

    @property
    def m(self) -> int:
        return self.cluster.m

    @property
    def b(self) -> float:
        return self.workload.b


def uniform_allocation(n: int, m: int) -> np.ndarray:
    return np.full((n, m), 1.0 / m)


def validate_allocation(alloc, n: int | None = None, m: int | None = None) -> np.ndarray:
    """Check that ``alloc`` is a nonnegative row-stochastic matrix."""
    a = np.asarray(alloc, dtype=float)
    if a.ndim != 2:
        raise ValueError("allocation must be a matrix")
    if (n is not None and a.shape[0] != n) or (m is not None and a.shape[1] != m):
        raise ValueError(f"allocation shape {a.shape} does not match ({n}, {m})")
    if np.any(a < 0):
        raise ValueError("allocation entries must be nonnegative")
    if np.any(np.abs(a.sum(axis=1) - 1) > ROW_SUM_TOL):
        raise ValueError("allocation rows must sum to 1")
    return a


def mg1_mean_time(lambda_node: float, mu: float, sigma2: float) -> float:
    """Mean time in system of an M/G/1 queue (Pollaczek-Khinchine).

    Parameters
    ----------
    lambda_node : float
        Poisson arrival rate.
    mu : float
        Service rate; the mean service time is ``1 / mu``.
    sigma2 : float
        Variance of the service time, seconds squared.
    """
    if lambda_node < 0 or mu <= 0 or sigma2 < 0:
        raise ValueError("need lambda >= 0, mu > 0, sigma2 >= 0")
    if lambda_node >= mu:
        raise UnstableQueueError(f"arrival rate {lambda_node:g} >= service rate {mu:g}")
    return 1 / mu + lambda_node * (sigma2 + 1 / mu**2) / (2 * (1 - lambda_node / mu))


def node_loads(state: SystemState, alloc) -> np.ndarray:
    """Total offered rate at each node, ``sum_k lam_k a_kj``."""
    return state.lam @ np.asarray(alloc, dtype=float)


def available_capacity(state: SystemState, alloc, i: int) -> np.ndarray:
    """Service rate of each node left over for scheduler ``i``."""
    a = np.asarray(alloc, dtype=float)
    others = node_loads(state, a) - state.lam[i] * a[i]
    mu_ji = state.cluster.mu - others
    if np.any(mu_ji <= 0):
        bad = np.flatnonzero(mu_ji <= 0).tolist()
        raise InfeasibleStateError(f"no capacity left for scheduler {i} on nodes {bad}")
    return mu_ji


def slice_cost(a, mu_ji, lam_i, e, b, c):
    """Completion time of a task slice: queueing plus transmission.

    Equals ``a / (mu_ji - lam_i a) + e + b a / c``; broadcasts over arrays.
    """
    a = np.asarray(a, dtype=float)
    slack = mu_ji - lam_i * a
    if np.any(slack <= 0):
        raise UnstableQueueError("slice rate reaches the capacity left on a node")
    return a / slack + e + b * a / c


def slice_cost_expanded(a, mu_node, node_load, e, b, c):
    """Slice completion time written with the node's full service rate.

    ``node_load`` is the total offered rate at the node including this
    scheduler's own share. Agrees with :func:`slice_cost`.
    """
    a = np.asarray(a, dtype=float)
    if np.any(node_load >= mu_node):
        raise UnstableQueueError("node load reaches its service rate")
    service = (1 / mu_node + node_load / (mu_node * (mu_node - node_load))) * a
    transmission = e + b * a / c
    return service + transmission


def slice_cost_gradient(a, mu_ji, lam_i, b, c):
    """Derivative of :func:`slice_cost` with respect to the slice fraction."""
    a = np.asarray(a, dtype=float)
    slack = mu_ji - lam_i * a
    if np.any(slack <= 0):
        raise UnstableQueueError("slice rate reaches the capacity left on a node")
    return mu_ji / slack**2 + b / c


def slice_cost_curvature(a, mu_ji, lam_i):
    """Second derivative of :func:`slice_cost`; positive for ``lam_i > 0``."""
    slack = mu_ji - lam_i * np.asarray(a, dtype=float)
    return 2 * lam_i * mu_ji / slack**3


def row_costs(state: SystemState, alloc, i: int) -> np.ndarray:
    """Slice completion times of scheduler ``i`` on every node."""
    a = np.asarray(alloc, dtype=float)
    mu_ji = available_capacity(state, a, i)
    cl = state.cluster
    return slice_cost(a[i], mu_ji, state.lam[i], cl.delay[i], state.b, cl.bandwidth[i])


def response_time(state: SystemState, alloc, i: int) -> float:
    """Response time of scheduler ``i``: its slowest slice, slices running in parallel."""
    return float(np.max(row_costs(state, alloc, i)))


def completion_time(state: SystemState, alloc, i: int) -> float:
    """Total time of scheduler ``i``'s slices when run one after another."""
    return float(np.sum(row_costs(state, alloc, i)))


@dataclass(frozen=True)
class StabilityReport:
    ok: bool
    violating_nodes: tuple[int, ...] = ()
    total_rate_ok: bool = True

    def __bool__(self):
        return self.ok


def check_stability(state: SystemState, alloc) -> StabilityReport:
    """Report nodes whose offered rate reaches their service rate.

    Never raises on an unstable allocation, so sweeps can log violations.
    """
    loads = node_loads(state, alloc)
    bad = tuple(int(j) for j in np.flatnonzero(loads >= state.cluster.mu))
    total_ok = bool(state.lam.sum() < state.cluster.mu.sum())
    return StabilityReport(ok=not bad and total_ok, violating_nodes=bad, total_rate_ok=total_ok)


def row_caps(mu_ji, lam_i: float, margin: float = STABILITY_MARGIN) -> np.ndarray:
    """Largest stable slice fraction on each node, clipped to 1."""
    return np.minimum(1.0, (1 - margin) * np.asarray(mu_ji) / lam_i)
