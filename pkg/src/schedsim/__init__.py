"""Response-time task slicing for schedulers feeding heterogeneous M/G/1 nodes."""

from schedsim.entropy_solver import EntropyParams, InnerSolverParams, solve_minimax_row
from schedsim.experiments import Scenario, SweepSpec, builtin_scenarios, run_scenario, run_sweep
from schedsim.metrics import fairness_index
from schedsim.model import ClusterSpec, SystemState, WorkloadSpec
from schedsim.schedulers import evaluate, schedule_bs, schedule_gs, schedule_ps

__version__ = "0.1.0"

__all__ = [
    "ClusterSpec",
    "EntropyParams",
    "InnerSolverParams",
    "Scenario",
    "SweepSpec",
    "SystemState",
    "WorkloadSpec",
    "builtin_scenarios",
    "evaluate",
    "fairness_index",
    "run_scenario",
    "run_sweep",
    "schedule_bs",
    "schedule_gs",
    "schedule_ps",
    "solve_minimax_row",
]
