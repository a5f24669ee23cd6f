"""Smoothed minimax solver built on an adjustable entropy function.

A row ``x`` of the allocation matrix is chosen to minimise
``max_j f_j(x_j)`` over the simplex, with ``f_j`` the slice completion
times. The max is replaced by the weighted log-sum-exp

    F_p(x, w) = (1/p) ln sum_j w_j exp(p f_j(x))

which is minimised by projected gradient; between solves the weights are
re-estimated from the current point and ``p`` is raised geometrically.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from schedsim import model

log = logging.getLogger(__name__)

_WEIGHT_FLOOR = 1e-300


@dataclass(frozen=True)
class InnerSolverParams:
    step0: float = 1e-2
    backtrack: float = 0.5
    max_iter: int = 500
    grad_tol: float = 1e-8

    def __post_init__(self):
        if min(self.step0, self.backtrack, self.max_iter, self.grad_tol) <= 0:
            raise ValueError("inner solver parameters must be positive")
        if self.backtrack >= 1:
            raise ValueError("backtrack factor must be below 1")


@dataclass(frozen=True)
class EntropyParams:
    """Controls of the p-escalation loop.

    ``p0`` is the starting smoothing parameter, multiplied by ``r`` after
    every solve while it is below the cap ``P``. The loop stops once two
    successive rows are closer than ``eps`` or after ``max_outer`` solves.
    """

    p0: float = 10.0
    r: float = 10.0
    P: float = 1e6
    eps: float = 1e-4
    max_outer: int = 50
    inner: InnerSolverParams = field(default_factory=InnerSolverParams)

    def __post_init__(self):
        if not self.p0 > 0:
            raise ValueError("p0 must be positive")
        if not self.r > 1:
            raise ValueError("r must exceed 1")
        if not self.P >= self.p0:
            raise ValueError("P must be at least p0")
        if not self.eps > 0 or self.max_outer < 1:
            raise ValueError("eps and max_outer must be positive")


def uniform_weights(m: int) -> np.ndarray:
    return np.full(m, 1.0 / m)


def _check_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0) or abs(w.sum() - 1) > 1e-9:
        raise ValueError("weights must be positive and sum to 1")
    return w


def entropy_value(f, weights, p: float) -> float:
    """Weighted log-sum-exp of ``f`` at smoothing level ``p``.

    Lies between ``max(f) + ln(w_argmax) / p`` and ``max(f)``.
    """
    f = np.asarray(f, dtype=float)
    w = _check_weights(weights)
    top = f.max()
    return float(top + np.log(np.dot(w, np.exp(p * (f - top)))) / p)


def update_weights(weights, f, p: float) -> np.ndarray:
    """Reweight components by ``exp(p f)`` and renormalise.

    Entries are floored at a tiny positive value so they stay strictly
    positive when ``p`` is large.
    """
    f = np.asarray(f, dtype=float)
    w = np.asarray(weights, dtype=float) * np.exp(p * (f - f.max()))
    w = np.maximum(w / w.sum(), _WEIGHT_FLOOR)
    return w / w.sum()


@dataclass(frozen=True)
class RowContext:
    """Everything one scheduler's row costs depend on, others held fixed."""

    mu_ji: np.ndarray
    lam_i: float
    delay: np.ndarray
    b: float
    bandwidth: np.ndarray
    margin: float = model.STABILITY_MARGIN

    @classmethod
    def from_state(cls, state: model.SystemState, alloc, i: int) -> "RowContext":
        mu_ji = model.available_capacity(state, alloc, i)
        cl = state.cluster
        return cls(mu_ji, float(state.lam[i]), cl.delay[i], state.b, cl.bandwidth[i])

    @property
    def m(self) -> int:
        return self.mu_ji.size

    @property
    def caps(self) -> np.ndarray:
        return model.row_caps(self.mu_ji, self.lam_i, self.margin)

    def costs(self, x) -> np.ndarray:
        return model.slice_cost(x, self.mu_ji, self.lam_i, self.delay, self.b, self.bandwidth)

    def cost_gradients(self, x) -> np.ndarray:
        return model.slice_cost_gradient(x, self.mu_ji, self.lam_i, self.b, self.bandwidth)

    def max_cost(self, x) -> float:
        return float(self.costs(x).max())

    def sum_cost(self, x) -> float:
        return float(self.costs(x).sum())


def smoothing_weights(f, weights, p: float) -> np.ndarray:
    """Softmax weights ``w_j exp(p f_j) / sum_k w_k exp(p f_k)``, without flooring."""
    f = np.asarray(f, dtype=float)
    z = np.asarray(weights, dtype=float) * np.exp(p * (f - f.max()))
    return z / z.sum()


def entropy_gradient(x, ctx: RowContext, weights, p: float) -> np.ndarray:
    """Gradient of the smoothed row objective with respect to the row."""
    s = smoothing_weights(ctx.costs(x), weights, p)
    return s * ctx.cost_gradients(x)


def project_capped_simplex(v, caps) -> np.ndarray:
    """Euclidean projection onto ``{x : 0 <= x <= caps, sum(x) = 1}``.

    The result is ``clip(v - theta, 0, caps)``. The map
    ``theta -> sum(clip(v - theta, 0, caps))`` is nonincreasing and
    piecewise linear with kinks at ``v`` and ``v - caps``; bisection over
    the sorted kinks finds the piece crossing 1, which is then solved
    exactly.
    """
    v = np.asarray(v, dtype=float)
    u = np.asarray(caps, dtype=float)
    if np.any(u < 0) or u.sum() < 1:
        raise ValueError(f"capped simplex is empty (caps sum to {u.sum():g})")
    if u.sum() == 1:
        return u.copy()
    kinks = np.unique(np.concatenate([v - u, v]))
    # sums at kinks, nonincreasing; first is sum(u) >= 1, last is 0
    sums = np.minimum(np.maximum(v - kinks[:, None], 0), u).sum(axis=1)
    k = int(np.searchsorted(-sums, -1.0, side="right")) - 1
    lo, hi = kinks[k], kinks[min(k + 1, kinks.size - 1)]
    s_lo, s_hi = sums[k], sums[min(k + 1, kinks.size - 1)]
    theta = lo if s_lo == s_hi else lo + (s_lo - 1) * (hi - lo) / (s_lo - s_hi)
    x = np.minimum(np.maximum(v - theta, 0), u)
    # spread the residual over the coordinates strictly inside their bounds
    free = (x > 0) & (x < u)
    if free.any():
        x[free] += (1 - x.sum()) / free.sum()
        x = np.clip(x, 0, u)
    return x


@dataclass
class DescentResult:
    x: np.ndarray
    value: float
    n_iter: int
    converged: bool


def projected_gradient(
    fun: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    x0,
    caps,
    inner: InnerSolverParams,
    callback: Callable[[np.ndarray, float], None] | None = None,
) -> DescentResult:
    """Projected gradient descent with backtracking over a capped simplex.

    A trial step ``t`` is accepted when ``fun`` lies below its quadratic
    model with curvature ``1/t``, so accepted iterates never increase
    ``fun``. Each iteration first tries twice the previously accepted step.
    ``callback(x, fun(x))`` sees the start and every accepted iterate.
    """
    x = project_capped_simplex(x0, caps)
    fx = fun(x)
    if callback is not None:
        callback(x, fx)
    t = inner.step0
    converged = False
    k = 0
    for k in range(1, inner.max_iter + 1):
        g = grad(x)
        # stationarity measure, step-independent
        if np.linalg.norm(x - project_capped_simplex(x - g, caps)) < inner.grad_tol:
            converged = True
            break
        t = min(2 * t, 1e6)
        while True:
            y = project_capped_simplex(x - t * g, caps)
            d = y - x
            fy = fun(y)
            if fy <= fx + g @ d + (d @ d) / (2 * t):
                break
            t *= inner.backtrack
            if t < 1e-300:
                break
        if not fy <= fx or not np.any(d):
            converged = True
            break
        x, fx = y, fy
        if callback is not None:
            callback(x, fx)
    return DescentResult(x, float(fx), k, converged)


def minimize_smoothed(x_start, ctx: RowContext, weights, p: float,
                      inner: InnerSolverParams | None = None) -> np.ndarray:
    """Minimise the smoothed row objective from ``x_start``.

    Returns a row whose smoothed value does not exceed that of ``x_start``.
    """
    inner = inner or InnerSolverParams()
    if ctx.m == 1:
        return np.ones(1)
    w = _check_weights(weights)

    def fun(x):
        return entropy_value(ctx.costs(x), w, p)

    def grad(x):
        return entropy_gradient(x, ctx, w, p)

    x0 = np.asarray(x_start, dtype=float)
    start = fun(x0)
    res = projected_gradient(fun, grad, x0, ctx.caps, inner)
    if res.value > start + 1e-12 * max(1.0, abs(start)):
        log.warning("smoothed objective rose from %.17g to %.17g", start, res.value)
        return x0.copy()
    return res.x


@dataclass
class MinimaxResult:
    x: np.ndarray
    value: float
    n_outer: int
    converged: bool
    p_final: float


def solve_minimax_row(x_start, ctx: RowContext, params: EntropyParams | None = None) -> MinimaxResult:
    """Minimise the slowest slice of one row by the adjustable entropy method.

    Alternates :func:`minimize_smoothed` with weight updates, raising ``p``
    by ``r`` up to ``P``. The returned row is the best iterate by the true
    max-cost, so it is never worse than ``x_start``.
    """
    params = params or EntropyParams()
    x = np.asarray(x_start, dtype=float).copy()
    if ctx.m == 1:
        return MinimaxResult(np.ones(1), ctx.max_cost(np.ones(1)), 0, True, params.p0)

    weights = uniform_weights(ctx.m)
    p = params.p0
    best_x, best_val = x, ctx.max_cost(x)
    converged = False
    k = 0
    for k in range(1, params.max_outer + 1):
        x_new = minimize_smoothed(x, ctx, weights, p, params.inner)
        f = ctx.costs(x_new)
        if f.max() < best_val:
            best_x, best_val = x_new, float(f.max())
        step = np.linalg.norm(x_new - x)
        x = x_new
        if step < params.eps:
            converged = True
            break
        weights = update_weights(weights, f, p)
        if p < params.P:
            p *= params.r
    if not converged:
        log.info("entropy loop hit max_outer=%d (p=%g)", params.max_outer, p)
    return MinimaxResult(best_x, best_val, k, converged, p)
