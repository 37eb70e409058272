"""Command line interface: ``groupswarm {plan,bench,primitive,verify}``."""

import argparse
import csv
import logging
import os
import sys
from typing import List, Optional, Sequence

from groupswarm import defaults
from groupswarm._toplevel_api import plan, verify
from groupswarm.allocation import allocate_groups
from groupswarm.brackets import compile_primitive, save_library
from groupswarm.dynamics import SwarmParams
from groupswarm.errors import ScenarioParseError
from groupswarm.harness import batch, plot, scenario
from groupswarm.planning import PLANNERS, Scenario, Status
from groupswarm.planning.comparison import compare_primitive_implementations

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TIMEOUT = 2
EXIT_INFEASIBLE = 3
EXIT_INVALID = 4

_EXIT_CODES = {
    Status.SOLVED: EXIT_OK,
    Status.TIMEOUT: EXIT_TIMEOUT,
    Status.INFEASIBLE: EXIT_INFEASIBLE,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groupswarm", description="Plan motions of a swarm driven by group signals."
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        help="Logging threshold",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    plan_parser = commands.add_parser("plan", help="Plan one scenario")
    plan_parser.add_argument("--scenario", required=True, help="Scenario file or bundled name")
    plan_parser.add_argument("--planner", choices=PLANNERS, help="Overrides the scenario")
    plan_parser.add_argument("--seed", type=int, help="Overrides the scenario")
    plan_parser.add_argument("--out", required=True, help="Output directory")
    plan_parser.add_argument("--verify", action="store_true", help="Replay the saved sequence")
    plan_parser.add_argument("--no-plot", action="store_true", help="Skip the SVG plot")

    bench_parser = commands.add_parser("bench", help="Run a batch of planners and seeds")
    bench_parser.add_argument("--spec", required=True, help="Batch file or bundled name")
    bench_parser.add_argument("--out", required=True, help="Output directory")
    bench_parser.add_argument(
        "--counting-clock",
        action="store_true",
        help="Count clock readings instead of measuring time, for reproducible tables",
    )
    bench_parser.add_argument("--no-plot", action="store_true", help="Skip the SVG plots")

    primitive_parser = commands.add_parser("primitive", help="Compile a subgroup primitive")
    primitive_parser.add_argument("--subgroup", required=True, help="Robots, e.g. 4,5")
    primitive_parser.add_argument("--n", type=int, required=True, help="Swarm size")
    primitive_parser.add_argument("--d", type=float, default=1.0, help="Displacement")
    primitive_parser.add_argument("--eps", type=float, default=defaults.EPSILON)
    primitive_parser.add_argument(
        "--max-order", type=int, help="Highest bracket order searched, unbounded by default"
    )
    primitive_parser.add_argument("--out", required=True, help="Sequence file")
    primitive_parser.add_argument("--library", help="Also write a primitive library file")
    primitive_parser.add_argument(
        "--compare",
        action="store_true",
        help="Print hand-designed versus optimised costs as CSV",
    )
    primitive_parser.add_argument("--seed", type=int, default=0)

    verify_parser = commands.add_parser("verify", help="Replay a saved sequence")
    verify_parser.add_argument("--scenario", required=True, help="Scenario file or bundled name")
    verify_parser.add_argument("--sequence", required=True, help="Sequence file")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "plan":
            return _plan(args)
        if args.command == "bench":
            return _bench(args)
        if args.command == "primitive":
            return _primitive(args)
        return _verify(args)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


def _load(name: str) -> Scenario:
    if not os.path.exists(name) and name in scenario.BUNDLED:
        return scenario.load_bundled(name)
    return scenario.load_scenario(name)


def _plan(args: argparse.Namespace) -> int:
    scn = _load(args.scenario)
    if args.seed is not None:
        scn = scn.replace(seed=args.seed)
    if args.planner is not None:
        scn = scn.replace(config=scn.config._replace(planner=args.planner))
    result = plan(scn)
    os.makedirs(args.out, exist_ok=True)
    sequence_path = os.path.join(args.out, "sequence.txt")
    scenario.save_sequence(result.seq, sequence_path, alloc=scn.alloc)
    batch.write_trajectory(result, os.path.join(args.out, "trajectory.csv"))
    row = batch.MetricRow(scn.config.planner, scn.seed, result.status.value, *result.metrics)
    batch.write_metrics([row], os.path.join(args.out, "metrics.csv"))
    if not args.no_plot:
        plot.emit_plot(result.traj, scn.env, os.path.join(args.out, "plot.svg"), goals=scn.goals)
    print(f"{result.status.value}: {result.message}" if result.message else result.status.value)
    code = _EXIT_CODES[result.status]
    if args.verify:
        seq = scenario.load_sequence(sequence_path, n=scn.n, alloc=scn.alloc)
        check = verify(scn, seq)
        print(f"verified: {check.ok} (max goal error {check.max_goal_error:.6g})")
        if result.solved and not check.ok:
            code = EXIT_INFEASIBLE
    return code


def _bench(args: argparse.Namespace) -> int:
    path = args.spec
    if not os.path.exists(path) and path in scenario.BUNDLED:
        path = scenario.bundled_path(path)
    spec = batch.load_batch(path, out=args.out)
    kwargs = {"clock_factory": batch.CountingClock} if args.counting_clock else {}
    rows = batch.run_batch(spec, plots=not args.no_plot, **kwargs)
    for row in rows:
        if row.seed == "mean":
            print(f"{row.planner}: {row.status}, runtime {row.runtime_s:.3f}s")
    return EXIT_OK


def _primitive(args: argparse.Namespace) -> int:
    subgroup = _labels(args.subgroup)
    alloc = allocate_groups(args.n)
    params = SwarmParams(n=args.n)
    prim = compile_primitive(
        subgroup, alloc=alloc, params=params, eps=args.eps, max_order=args.max_order
    )
    seq = prim.compile(args.d)
    scenario.save_sequence(seq, args.out, alloc=alloc)
    print(f"{prim.expr} (order {prim.order}, {seq.num_steps} steps)")
    if args.library:
        save_library([prim], args.library)
    if args.compare:
        rows = compare_primitive_implementations(subgroup, n=args.n, distance=args.d, seed=args.seed)
        writer = csv.writer(sys.stdout)
        writer.writerow(rows[0]._fields)
        for row in rows:
            writer.writerow(row)
    return EXIT_OK


def _verify(args: argparse.Namespace) -> int:
    scn = _load(args.scenario)
    seq = scenario.load_sequence(args.sequence, n=scn.n, alloc=scn.alloc)
    check = verify(scn, seq)
    print(
        f"reached: {check.reached}, collision free: {check.collision_free}, "
        f"max goal error: {check.max_goal_error:.6g}"
    )
    return EXIT_OK if check.ok else EXIT_INFEASIBLE


def _labels(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ScenarioParseError(f"Subgroup {text!r} is not a comma separated list.") from None


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
