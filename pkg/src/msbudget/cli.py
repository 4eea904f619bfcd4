"""Command line interface.

    msbudget generate --kind carbon --hours 8760 --base 300 --amplitude 100 --seed 1 --out ci.csv
    msbudget simulate --scenario bundled:scenario_flight_booking.json --out results/
    msbudget compare --hourly results/hourly.csv --out results/

Every failure prints a single line starting with ``error:`` to stderr and
exits with status 2.
"""
from __future__ import annotations

import argparse
import secrets
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .model import ApplicationError
from .reports import comparison_csv, summaries_from_hourly_csv, write_atomic, write_report
from .scenario import Scenario, ScenarioError, load_scenario, parse_strategies, resolve_path
from .sim import SimulationReport, compare, run_simulation
from .traces import TraceError, gen_synthetic_carbon, gen_synthetic_workload, save_trace

EXIT_OK = 0
EXIT_ERROR = 2


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _budget(value: str) -> float | str:
    try:
        return float(value)
    except ValueError:
        return value


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", help="scenario JSON file (flags below override its fields)")
    p.add_argument("--app", help="application description JSON")
    p.add_argument("--carbon", help="carbon-intensity CSV (hour,ci_g_per_kwh)")
    p.add_argument("--workload", help="workload CSV (hour,users)")
    p.add_argument("--budget", type=_budget, help="total budget in gCO2e, or 'midpoint'")
    p.add_argument("--alloc", choices=("proportional", "uniform"))
    p.add_argument("--strategies", help="comma-separated subset of os,bnb,hp,sca,ca")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--seed", type=int, help="reseed synthetic traces of the scenario")
    p.add_argument("--carryover", action="store_true", default=None, help="roll unused hourly budget forward")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="msbudget", description="Carbon-budgeted microservice configuration selection")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic trace CSV")
    gen.add_argument("--kind", choices=("carbon", "workload"), required=True)
    gen.add_argument("--hours", type=int, default=8760)
    gen.add_argument("--base", type=float, required=True)
    gen.add_argument("--amplitude", type=float, default=0.0)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--out", required=True, help="output CSV path")

    sim = sub.add_parser("simulate", help="simulate strategies and write hourly.csv and summary.csv")
    _add_scenario_flags(sim)
    sim.add_argument("--out", required=True, help="output directory")

    cmp_ = sub.add_parser("compare", help="pairwise strategy comparison table")
    _add_scenario_flags(cmp_)
    cmp_.add_argument("--hourly", help="compare an existing hourly.csv instead of simulating")
    cmp_.add_argument("--out", help="output directory for comparison.csv (default: stdout)")
    return parser


def scenario_from_args(args: argparse.Namespace) -> Scenario:
    if args.scenario:
        scenario = load_scenario(args.scenario)
    else:
        missing = [f"--{k}" for k in ("app", "carbon", "workload", "budget") if getattr(args, k) is None]
        if missing:
            raise CliError(f"missing {', '.join(missing)} (or pass --scenario)")
        scenario = Scenario(
            application=resolve_path(args.app),
            carbon=resolve_path(args.carbon),
            workload=resolve_path(args.workload),
            budget=args.budget,
        )
    overrides = {}
    if args.scenario:
        if args.app is not None:
            overrides["application"] = resolve_path(args.app)
        if args.carbon is not None:
            overrides["carbon"] = resolve_path(args.carbon)
        if args.workload is not None:
            overrides["workload"] = resolve_path(args.workload)
        if args.budget is not None:
            overrides["budget"] = args.budget
    if args.alloc is not None:
        overrides["alloc"] = args.alloc
    if args.strategies is not None:
        overrides["strategies"] = parse_strategies(args.strategies)
    if args.alpha is not None:
        overrides["alpha"] = args.alpha
    if args.beta is not None:
        overrides["beta"] = args.beta
    if args.carryover:
        overrides["carryover"] = True
    if overrides:
        scenario = replace(scenario, **overrides)
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    return scenario


def simulate_scenario(scenario: Scenario) -> SimulationReport:
    app = scenario.load_application()
    carbon = scenario.carbon_trace()
    workload = scenario.workload_trace()
    if len(carbon) != len(workload):
        raise ScenarioError(f"carbon trace has {len(carbon)} hours, workload trace has {len(workload)}")
    schedule = scenario.schedule(app, carbon, workload)
    return run_simulation(
        app, carbon, workload, schedule, scenario.strategies,
        ca_candidates=scenario.candidate_configs(app), carryover=scenario.carryover,
    )


def cmd_generate(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else secrets.randbelow(2**32)
    gen = gen_synthetic_carbon if args.kind == "carbon" else gen_synthetic_workload
    trace = gen(args.hours, args.base, args.amplitude, seed)
    save_trace(trace, args.out)
    print(f"seed: {seed}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    report = simulate_scenario(scenario_from_args(args))
    hourly, summary = write_report(report, args.out)
    print(f"wrote {hourly} and {summary}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    if args.hourly:
        path = Path(args.hourly)
        if not path.is_file():
            raise CliError(f"hourly: file not found: {path}")
        rows = compare(summaries_from_hourly_csv(path.read_text(encoding="utf-8"), str(path)))
    else:
        rows = compare(simulate_scenario(scenario_from_args(args)))
    text = comparison_csv(rows)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_atomic(out / "comparison.csv", text)
        print(f"wrote {out / 'comparison.csv'}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "simulate": cmd_simulate, "compare": cmd_compare}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (CliError, ScenarioError, ApplicationError, TraceError, ValueError, OSError) as exc:
        message = " ".join(str(exc).split())
        print(f"error: {message}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
