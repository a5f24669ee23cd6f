"""Brute-force row optimisers for single-scheduler instances.

These enumerate the simplex on a grid and share nothing with the
iterative solvers beyond the cost model, so tests can use them as
ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from schedsim import model

_GOLDEN = (np.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class GridSpec:
    step: float = 1e-4
    max_dims: int = 3

    def __post_init__(self):
        if not 0 < self.step <= 0.01:
            raise ValueError("grid step must lie in (0, 0.01]")
        if self.max_dims > 3:
            raise ValueError("grids above 3 dimensions are not supported")


def simplex_grid(m: int, step: float) -> np.ndarray:
    """All points of the probability simplex with coordinates on ``step``."""
    k = int(round(1 / step))
    if m == 1:
        return np.ones((1, 1))
    if m == 2:
        a = np.arange(k + 1) / k
        return np.column_stack([a, 1 - a])
    i, j = np.meshgrid(np.arange(k + 1), np.arange(k + 1), indexing="ij")
    keep = i + j <= k
    i, j = i[keep], j[keep]
    return np.column_stack([i, j, k - i - j]) / k


def _grid_costs(state: model.SystemState, rows: np.ndarray) -> np.ndarray:
    """Slice costs for each candidate row; unstable slices become +inf."""
    cl = state.cluster
    mu = cl.mu
    lam = state.lam[0]
    costs = np.full(rows.shape, np.inf)
    ok = lam * rows < mu
    a = rows[ok]
    mu_b = np.broadcast_to(mu, rows.shape)[ok]
    e = np.broadcast_to(cl.delay[0], rows.shape)[ok]
    c = np.broadcast_to(cl.bandwidth[0], rows.shape)[ok]
    costs[ok] = model.slice_cost(a, mu_b, lam, e, state.b, c)
    return costs


def _golden_section(fun, lo: float, hi: float, tol: float = 1e-9):
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = fun(x1), fun(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = fun(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = fun(x2)
    x = 0.5 * (lo + hi)
    return x, fun(x)


def _oracle(state: model.SystemState, grid: GridSpec, reduce):
    if state.n != 1:
        raise ValueError("oracles handle a single scheduler only")
    if state.m > grid.max_dims:
        raise ValueError(f"{state.m} nodes exceed the oracle limit of {grid.max_dims}")
    rows = simplex_grid(state.m, grid.step)
    values = reduce(_grid_costs(state, rows), axis=1)
    best = int(np.argmin(values))
    row, value = rows[best].copy(), float(values[best])
    if not np.isfinite(value):
        raise model.UnstableQueueError("no stable grid point")
    if state.m == 2:
        def fun(a):
            v = reduce(_grid_costs(state, np.array([[a, 1 - a]])), axis=1)[0]
            return float(v)

        lo = max(0.0, row[0] - grid.step)
        hi = min(1.0, row[0] + grid.step)
        a, v = _golden_section(fun, lo, hi)
        if v < value:
            row, value = np.array([a, 1 - a]), v
    return row, value


def oracle_minimax(state: model.SystemState, grid: GridSpec | None = None):
    """Row minimising the slowest slice, by exhaustive grid search.

    For two nodes the grid optimum is refined by golden-section search,
    which is valid because the max of convex costs is unimodal.
    """
    return _oracle(state, grid or GridSpec(), np.max)


def oracle_minsum(state: model.SystemState, grid: GridSpec | None = None):
    """Row minimising the summed slice times, by exhaustive grid search."""
    return _oracle(state, grid or GridSpec(), np.sum)
