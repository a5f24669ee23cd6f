"""Allocation algorithms: PS (response-time minimax), BS (balanced), GS.

PS and GS are best-response loops: schedulers are visited in index order,
each re-optimising its own row against the capacity the others leave it,
until the whole matrix moves less than ``eps`` (Frobenius norm) in a cycle.

GS is a stand-in for a game-theoretic scheduler that targets completion
time with slices run one after another. Each player minimises the sum of
its slice times instead of the maximum.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from schedsim import model
from schedsim.entropy_solver import (
    EntropyParams,
    InnerSolverParams,
    RowContext,
    projected_gradient,
    solve_minimax_row,
)

log = logging.getLogger(__name__)

ALGORITHMS = ("PS", "BS", "GS")


@dataclass
class ScheduleResult:
    alloc: np.ndarray
    cycles_used: int
    converged: bool
    diff_history: list[float] = field(default_factory=list)
    algorithm: str = ""


def initial_allocation(state: model.SystemState) -> np.ndarray:
    """Uniform rows, or rows proportional to service rate if uniform overloads a node.

    The proportional split loads node ``j`` with ``sum(lam) mu_j / sum(mu)``,
    which is stable whenever the system as a whole is.
    """
    alloc = model.uniform_allocation(state.n, state.m)
    if model.check_stability(state, alloc).ok:
        return alloc
    mu = state.cluster.mu
    return np.tile(mu / mu.sum(), (state.n, 1))


def _best_response_loop(state, solve_row, max_cycle, eps, name, trace=None):
    alloc = initial_allocation(state)
    history = []
    converged = False
    for cycle in range(1, max_cycle + 1):
        former = alloc.copy()
        for i in range(state.n):
            ctx = RowContext.from_state(state, alloc, i)
            alloc[i] = solve_row(alloc[i], ctx)
            if trace is not None:
                trace(i, alloc.copy())
        diff = float(np.linalg.norm(alloc - former))
        history.append(diff)
        log.debug("%s cycle %d diffA=%.3e", name, cycle, diff)
        if diff <= eps:
            converged = True
            break
    return ScheduleResult(alloc, cycle, converged, history, name)


def schedule_ps(state: model.SystemState, params: EntropyParams | None = None,
                max_cycle: int = 100, eps: float = 1e-4, trace=None) -> ScheduleResult:
    """Response-time scheduling: each scheduler minimises its slowest slice.

    ``trace``, if given, is called as ``trace(i, alloc)`` after every row
    update.
    """
    params = params or EntropyParams()

    def solve_row(x, ctx):
        return solve_minimax_row(x, ctx, params).x

    return _best_response_loop(state, solve_row, max_cycle, eps, "PS", trace)


def schedule_gs(state: model.SystemState, inner: InnerSolverParams | None = None,
                max_cycle: int = 100, eps: float = 1e-4, trace=None) -> ScheduleResult:
    """Completion-time game: each scheduler minimises its summed slice times."""
    inner = inner or InnerSolverParams()

    def solve_row(x, ctx):
        if ctx.m == 1:
            return np.ones(1)
        res = projected_gradient(ctx.sum_cost, ctx.cost_gradients, x, ctx.caps, inner)
        return res.x

    return _best_response_loop(state, solve_row, max_cycle, eps, "GS", trace)


def schedule_bs(state: model.SystemState, tol: float = 1e-10,
                max_sweeps: int = 1000) -> ScheduleResult:
    """Balanced scheduling: slices proportional to the capacity left over.

    Iterates ``a_ij = mu_ji / sum_j mu_ji`` to a fixed point, updating one
    row at a time.
    """
    alloc = initial_allocation(state)
    history = []
    converged = False
    for sweep in range(1, max_sweeps + 1):
        former = alloc.copy()
        for i in range(state.n):
            mu_ji = model.available_capacity(state, alloc, i)
            alloc[i] = mu_ji / mu_ji.sum()
        diff = float(np.linalg.norm(alloc - former))
        history.append(diff)
        if diff < tol:
            converged = True
            break
    return ScheduleResult(alloc, sweep, converged, history, "BS")


def schedule(state: model.SystemState, algorithm: str, params: EntropyParams | None = None,
             max_cycle: int = 100, eps: float = 1e-4) -> ScheduleResult:
    algorithm = algorithm.upper()
    params = params or EntropyParams()
    if algorithm == "PS":
        return schedule_ps(state, params, max_cycle, eps)
    if algorithm == "GS":
        return schedule_gs(state, params.inner, max_cycle, eps)
    if algorithm == "BS":
        return schedule_bs(state)
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")


@dataclass(frozen=True)
class Evaluation:
    """Per-scheduler costs of a joint allocation.

    ``response_time`` is the slowest slice (slices in parallel),
    ``completion_time`` the summed slice times (slices in sequence) and
    ``objective`` whichever of the two the algorithm itself optimises.
    """

    response_time: np.ndarray
    completion_time: np.ndarray
    objective: np.ndarray


def evaluate(state: model.SystemState, alloc, algorithm: str = "PS") -> Evaluation:
    costs = [model.row_costs(state, alloc, i) for i in range(state.n)]
    rt = np.array([c.max() for c in costs])
    ct = np.array([c.sum() for c in costs])
    return Evaluation(rt, ct, ct if algorithm.upper() == "GS" else rt)
