"""Command-line front end.

    schedsim run --scenario exp2 --algo ps,bs,gs --out results.csv
    schedsim sweep --scenario exp2 --param load --from 0.1 --to 0.9 --steps 9
    schedsim validate-queue --lambda 0.5 --mu 1 --kind exponential
    schedsim list-scenarios

Exit codes: 0 success, 2 bad configuration, 3 infeasible scenario,
4 some algorithm did not converge (results are still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import astuple, dataclass, fields, replace

import numpy as np

from schedsim import experiments, model
from schedsim.queue_validator import SERVICE_KINDS, SimSpec, simulate_queue
from schedsim.schedulers import ALGORITHMS

log = logging.getLogger("schedsim")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NOT_CONVERGED = 4


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class OutputRecord:
    scenario: str
    sweep_parameter: str
    sweep_value: str
    algorithm: str
    scheduler: int
    objective_value: float
    response_time: float
    fairness_index: float
    converged: bool
    cycles_used: int


def report_records(report: experiments.RunReport) -> list[OutputRecord]:
    rows = []
    value = "" if report.sweep_value is None else repr(report.sweep_value)
    for algo, out in report.outcomes.items():
        if out.error is not None:
            continue
        for i in range(out.response_time.size):
            rows.append(OutputRecord(
                report.label, report.sweep_parameter or "", value, algo, i + 1,
                float(out.objective[i]), float(out.response_time[i]),
                float(out.fairness), out.converged, out.result.cycles_used,
            ))
    return rows


def format_records(records: list[OutputRecord], fmt: str) -> str:
    buf = io.StringIO()
    if fmt == "csv":
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f.name for f in fields(OutputRecord)])
        for r in records:
            writer.writerow(astuple(r))
    else:
        for r in records:
            buf.write(json.dumps(r.__dict__) + "\n")
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _load_scenario(args) -> experiments.Scenario:
    if args.config:
        try:
            scenario = experiments.load_scenario(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc.strerror}") from exc
        except (ValueError, model.UnstableQueueError) as exc:
            raise ConfigError(f"invalid scenario {args.config}: {exc}") from exc
    else:
        known = experiments.builtin_scenarios()
        if args.scenario not in known:
            raise ConfigError(f"unknown scenario {args.scenario!r}; try list-scenarios")
        scenario = known[args.scenario]
    if args.algo:
        algos = tuple(a.strip().upper() for a in args.algo.split(",") if a.strip())
        try:
            scenario = replace(scenario, algorithms=algos)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return scenario


def _check_feasible(scenario: experiments.Scenario):
    try:
        scenario.state()
    except ValueError as exc:
        return str(exc)
    return None


def _finish(reports, args) -> int:
    records = [r for rep in reports for r in report_records(rep)]
    _emit(format_records(records, args.format), args.out)
    failures = [(rep, o) for rep in reports for o in rep.outcomes.values()
                if o.error is not None or not o.stable]
    for rep, o in failures:
        print(f"error: {o.algorithm} on {rep.label} "
              f"{rep.sweep_parameter or ''}={rep.sweep_value}: {o.error or 'unstable'}",
              file=sys.stderr)
    if failures:
        return EXIT_INFEASIBLE
    if not all(rep.converged for rep in reports):
        print("warning: some algorithms hit their cycle limit", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_run(args) -> int:
    scenario = _load_scenario(args)
    problem = _check_feasible(scenario)
    if problem:
        print(f"error: infeasible scenario: {problem}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return _finish([experiments.run_scenario(scenario)], args)


def _sweep_values(args) -> list[float]:
    if args.values is not None:
        try:
            values = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --values: {exc}") from exc
    elif args.start is not None and args.stop is not None and args.steps is not None:
        if args.steps < 1:
            raise ConfigError("--steps must be positive")
        values = np.round(np.linspace(args.start, args.stop, args.steps), 12).tolist()
    else:
        raise ConfigError("give --values or all of --from/--to/--steps")
    if not values:
        raise ConfigError("empty sweep value list")
    if args.param in ("scheduler_count", "node_count"):
        if any(v != int(v) for v in values):
            raise ConfigError(f"{args.param} values must be integers")
        values = [int(v) for v in values]
    return values


def cmd_sweep(args) -> int:
    scenario = _load_scenario(args)
    values = _sweep_values(args)
    try:
        sweep = experiments.SweepSpec(scenario, args.param, tuple(values))
        points = sweep.scenarios()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for v, s in zip(values, points):
        problem = _check_feasible(s)
        if problem:
            print(f"error: infeasible sweep point {args.param}={v}: {problem}", file=sys.stderr)
            return EXIT_INFEASIBLE
    return _finish(experiments.run_sweep(sweep, jobs=args.jobs), args)


def cmd_validate_queue(args) -> int:
    try:
        spec = SimSpec(args.lam, args.mu, args.kind, args.num_jobs, seed=args.seed)
    except model.UnstableQueueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    res = simulate_queue(spec)
    analytic = spec.analytic_mean()
    z = (res.mean - analytic) / res.stderr
    text = (
        f"analytic_mean {analytic!r}\n"
        f"empirical_mean {res.mean!r}\n"
        f"standard_error {res.stderr!r}\n"
        f"z_score {z!r}\n"
        f"jobs_measured {res.n_measured}\n"
        f"rng {res.rng} seed {spec.seed}\n"
    )
    _emit(text, args.out)
    return EXIT_OK


def cmd_list_scenarios(args) -> int:
    lines = []
    for name, s in experiments.builtin_scenarios().items():
        lines.append(f"{name}\tschedulers={s.workload.n}\tnodes={s.cluster.m}\t"
                     f"rho={s.workload.rho}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")

    source = argparse.ArgumentParser(add_help=False)
    group = source.add_mutually_exclusive_group()
    group.add_argument("--scenario", default="exp2", help="built-in scenario name")
    group.add_argument("--config", help="scenario JSON file")
    source.add_argument("--algo", help=f"comma-separated subset of {','.join(ALGORITHMS)}")

    parser = argparse.ArgumentParser(prog="schedsim", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common, source], help="run one scenario")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", parents=[common, source], help="sweep one parameter")
    p.add_argument("--param", required=True, choices=experiments.SWEEP_PARAMETERS)
    p.add_argument("--values", help="comma-separated values (bandwidth in Kbps)")
    p.add_argument("--from", dest="start", type=float)
    p.add_argument("--to", dest="stop", type=float)
    p.add_argument("--steps", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate-queue", parents=[common],
                       help="simulate one M/G/1 queue against the analytic mean")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--kind", choices=SERVICE_KINDS, default="exponential")
    p.add_argument("--num-jobs", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_validate_queue)

    p = sub.add_parser("list-scenarios", parents=[common], help="list built-in scenarios")
    p.set_defaults(func=cmd_list_scenarios)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("SCHEDSIM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
