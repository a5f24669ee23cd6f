"""Scenario definitions and sweep drivers for the comparative experiments.

Built-in scenarios cover the reference configurations: seven
schedulers on eight nodes with either clearly unequal (``exp1``) or
nearly equal (``exp2``) service rates, plus the bases of the two size
sweeps. Unless swept, every scenario uses ``rho = 0.5``, 1 Mbit tasks,
0.5 s link delay and 100 Kbps links.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from schedsim import metrics, model
from schedsim.entropy_solver import EntropyParams, InnerSolverParams
from schedsim.schedulers import ALGORITHMS, ScheduleResult, evaluate, schedule

log = logging.getLogger(__name__)

# Grouped table columns ("2-5") are expanded to one entry per index.
PHI_BASE = (0.0035, 0.01, 0.01, 0.01, 0.01, 0.006, 0.005)
PHI_15 = PHI_BASE + (0.003, 0.003, 0.003, 0.002, 0.002, 0.002, 0.0015, 0.0015)
MU_UNEQUAL = (0.28, 0.22, 0.19, 0.23, 0.20, 0.26, 0.22, 0.23)
MU_NEAR_EQUAL = (0.25, 0.26, 0.23, 0.24, 0.22, 0.25, 0.22, 0.23)
MU_10 = (0.25, 0.26, 0.23, 0.23, 0.23, 0.21, 0.24, 0.24, 0.24, 0.22)
MU_15 = (0.25, 0.26, 0.23, 0.23, 0.23, 0.21, 0.24, 0.24, 0.24,
         0.22, 0.22, 0.22, 0.22, 0.20, 0.20)

DEFAULT_DELAY = 0.5
DEFAULT_BANDWIDTH = 100 * model.KBPS
DEFAULT_TASK_BITS = model.MEGABIT
DEFAULT_MAX_CYCLE = 100

SWEEP_PARAMETERS = ("load", "scheduler_count", "node_count", "bandwidth")


@dataclass(frozen=True)
class Scenario:
    cluster: model.ClusterSpec
    workload: model.WorkloadSpec
    algorithms: tuple[str, ...] = ALGORITHMS
    solver: EntropyParams = field(default_factory=EntropyParams)
    label: str = ""
    max_cycle: int = DEFAULT_MAX_CYCLE

    def __post_init__(self):
        algos = tuple(a.upper() for a in self.algorithms)
        if not algos:
            raise ValueError("scenario needs at least one algorithm")
        unknown = set(algos) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms {sorted(unknown)}")
        object.__setattr__(self, "algorithms", algos)
        if self.cluster.n_links != self.workload.n:
            raise ValueError("link matrices do not match the scheduler count")
        if self.max_cycle < 1:
            raise ValueError("max_cycle must be positive")

    def state(self) -> model.SystemState:
        return model.SystemState(self.cluster, self.workload)


def make_scenario(mu, phi, label: str, rho: float = 0.5, delay: float = DEFAULT_DELAY,
                  bandwidth: float = DEFAULT_BANDWIDTH, b: float = DEFAULT_TASK_BITS,
                  **kwargs) -> Scenario:
    cluster = model.ClusterSpec.uniform(mu, len(phi), delay, bandwidth)
    return Scenario(cluster, model.WorkloadSpec(phi, rho, b), label=label, **kwargs)


def builtin_scenarios() -> dict[str, Scenario]:
    return {
        "exp1": make_scenario(MU_UNEQUAL, PHI_BASE, "exp1"),
        "exp2": make_scenario(MU_NEAR_EQUAL, PHI_BASE, "exp2"),
        "schedulers": make_scenario(MU_10, PHI_15, "schedulers"),
        "nodes": make_scenario(MU_15, PHI_BASE, "nodes"),
    }


# -- serialization ----------------------------------------------------------

def _matrix_or_scalar(mat: np.ndarray, scale: float):
    flat = mat.ravel()
    if np.all(flat == flat[0]):
        return float(flat[0]) / scale
    return (mat / scale).tolist()


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "label": s.label,
        "algorithms": list(s.algorithms),
        "nodes": [{"mu": float(mu)} for mu in s.cluster.mu],
        "schedulers": [{"phi": float(phi)} for phi in s.workload.phi],
        "rho": s.workload.rho,
        "task_megabits": s.workload.b / model.MEGABIT,
        "delay_seconds": _matrix_or_scalar(s.cluster.delay, 1.0),
        "bandwidth_kbps": _matrix_or_scalar(s.cluster.bandwidth, model.KBPS),
        "solver": {
            "p0": s.solver.p0,
            "r": s.solver.r,
            "cap": s.solver.P,
            "eps": s.solver.eps,
            "max_outer": s.solver.max_outer,
            "max_cycle": s.max_cycle,
            "inner": asdict(s.solver.inner),
        },
    }


def _broadcast(value, n: int, m: int, scale: float, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float) * scale
    if arr.ndim == 0:
        return np.full((n, m), float(arr))
    if arr.shape != (n, m):
        raise ValueError(f"{name} must be a scalar or a {n}x{m} matrix")
    return arr


def scenario_from_dict(d: dict) -> Scenario:
    """Build a scenario from its JSON form; raises ``ValueError`` on bad input."""
    try:
        mu = [float(node["mu"]) for node in d["nodes"]]
        phi = [float(s["phi"]) for s in d["schedulers"]]
        n, m = len(phi), len(mu)
        solver = dict(d.get("solver", {}))
        max_cycle = int(solver.pop("max_cycle", DEFAULT_MAX_CYCLE))
        inner = InnerSolverParams(**solver.pop("inner", {}))
        if "cap" in solver:
            solver["P"] = solver.pop("cap")
        params = EntropyParams(inner=inner, **solver)
        cluster = model.ClusterSpec(
            mu,
            _broadcast(d.get("delay_seconds", DEFAULT_DELAY), n, m, 1.0, "delay_seconds"),
            _broadcast(d.get("bandwidth_kbps", DEFAULT_BANDWIDTH / model.KBPS), n, m,
                       model.KBPS, "bandwidth_kbps"),
        )
        workload = model.WorkloadSpec(
            phi, float(d["rho"]), float(d.get("task_megabits", 1.0)) * model.MEGABIT
        )
        return Scenario(cluster, workload, tuple(d.get("algorithms", ALGORITHMS)),
                        params, str(d.get("label", "")), max_cycle)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed scenario: {exc!r}") from exc


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))


# -- running ----------------------------------------------------------------

@dataclass
class AlgorithmOutcome:
    """What one algorithm produced on one scenario.

    On failure ``error`` holds the message and the numeric fields are None.
    """

    algorithm: str
    result: ScheduleResult | None = None
    objective: np.ndarray | None = None
    response_time: np.ndarray | None = None
    fairness: float | None = None
    stable: bool = False
    error: str | None = None

    @property
    def converged(self) -> bool:
        return self.result is not None and self.result.converged


@dataclass
class RunReport:
    label: str
    outcomes: dict[str, AlgorithmOutcome]
    sweep_parameter: str | None = None
    sweep_value: float | None = None

    def __getitem__(self, algorithm: str) -> AlgorithmOutcome:
        return self.outcomes[algorithm.upper()]

    @property
    def ok(self) -> bool:
        return all(o.error is None and o.stable for o in self.outcomes.values())

    @property
    def converged(self) -> bool:
        return all(o.converged for o in self.outcomes.values())


def run_algorithm(s: Scenario, state: model.SystemState, algorithm: str) -> AlgorithmOutcome:
    try:
        res = schedule(state, algorithm, s.solver, s.max_cycle, s.solver.eps)
        stable = model.check_stability(state, res.alloc).ok
        ev = evaluate(state, res.alloc, algorithm)
        return AlgorithmOutcome(
            algorithm, res, ev.objective, ev.response_time,
            metrics.fairness_index(ev.response_time), stable,
        )
    except (ValueError, ArithmeticError) as exc:
        log.warning("%s failed on %s: %s", algorithm, s.label, exc)
        return AlgorithmOutcome(algorithm, error=str(exc))


def run_scenario(s: Scenario) -> RunReport:
    """Run every requested algorithm; a failure in one does not stop the others."""
    try:
        state = s.state()
    except ValueError as exc:
        outcomes = {a: AlgorithmOutcome(a, error=str(exc)) for a in s.algorithms}
        return RunReport(s.label, outcomes)
    return RunReport(s.label, {a: run_algorithm(s, state, a) for a in s.algorithms})


@dataclass(frozen=True)
class SweepSpec:
    """A one-parameter family of scenarios.

    ``values`` are loads for ``load``, Kbps for ``bandwidth`` and counts
    for the two size sweeps. Size sweeps take the leading entries of
    ``phi_table`` / ``mu_table``, defaulting to the base scenario's own.
    """

    base: Scenario
    parameter: str
    values: tuple
    phi_table: tuple | None = None
    mu_table: tuple | None = None

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(f"sweep parameter must be one of {SWEEP_PARAMETERS}")
        if len(self.values) == 0:
            raise ValueError("sweep needs at least one value")
        object.__setattr__(self, "values", tuple(self.values))

    def scenarios(self) -> list[Scenario]:
        return [self.scenario_at(v) for v in self.values]

    def scenario_at(self, value) -> Scenario:
        base = self.base
        cl, wl = base.cluster, base.workload
        if self.parameter == "load":
            return replace(base, workload=replace(wl, rho=float(value)))
        if self.parameter == "bandwidth":
            bw = np.full(cl.delay.shape, float(value) * model.KBPS)
            return replace(base, cluster=model.ClusterSpec(cl.mu, cl.delay, bw))
        count = int(value)
        if count != value or count < 1:
            raise ValueError(f"{self.parameter} values must be positive integers")
        phi = np.asarray(self.phi_table if self.phi_table is not None else wl.phi)
        mu = np.asarray(self.mu_table if self.mu_table is not None else cl.mu)
        table = phi if self.parameter == "scheduler_count" else mu
        if count > table.size:
            raise ValueError(f"{self.parameter} {count} exceeds the {table.size}-entry table")
        if self.parameter == "scheduler_count":
            phi = phi[:count]
        else:
            mu = mu[:count]
        n, m = phi.size, mu.size
        cluster = model.ClusterSpec(
            mu, _resize(cl.delay, n, m, "delay"), _resize(cl.bandwidth, n, m, "bandwidth")
        )
        return replace(base, cluster=cluster, workload=replace(wl, phi=phi))


def _resize(mat: np.ndarray, n: int, m: int, name: str) -> np.ndarray:
    flat = mat.ravel()
    if np.all(flat == flat[0]):
        return np.full((n, m), flat[0])
    if mat.shape[0] >= n and mat.shape[1] >= m:
        return mat[:n, :m].copy()
    raise ValueError(f"non-uniform {name} matrix cannot grow to {n}x{m}")


def _run_point(args):
    s, parameter, value = args
    report = run_scenario(s)
    report.sweep_parameter, report.sweep_value = parameter, value
    return report


def run_sweep(sw: SweepSpec, jobs: int = 1) -> list[RunReport]:
    """One report per sweep value, in the order given.

    Points that cannot be built are reported as failed rather than aborting
    the sweep. ``jobs > 1`` runs points in worker processes.
    """
    tasks, reports = [], [None] * len(sw.values)
    for k, v in enumerate(sw.values):
        try:
            tasks.append((k, (sw.scenario_at(v), sw.parameter, v)))
        except ValueError as exc:
            outcomes = {a: AlgorithmOutcome(a, error=str(exc)) for a in sw.base.algorithms}
            reports[k] = RunReport(sw.base.label, outcomes, sw.parameter, v)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_run_point, [t for _, t in tasks]))
    else:
        done = [_run_point(t) for _, t in tasks]
    for (k, _), rep in zip(tasks, done):
        reports[k] = rep
    return reports


def builtin_sweeps() -> dict[str, SweepSpec]:
    """The reference sweep designs."""
    sc = builtin_scenarios()
    return {
        "load": SweepSpec(sc["exp2"], "load", tuple(np.round(np.arange(1, 10) / 10, 10))),
        "scheduler_count": SweepSpec(sc["schedulers"], "scheduler_count", tuple(range(7, 16)),
                                     phi_table=PHI_15),
        "node_count": SweepSpec(sc["nodes"], "node_count", tuple(range(10, 16)),
                                mu_table=MU_15),
        "bandwidth": SweepSpec(sc["exp2"], "bandwidth", (100, 500, 1024)),
    }
