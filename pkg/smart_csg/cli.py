"""Command-line interface for smart_csg.

Subcommands: ``solve``, ``tune``, ``bench`` and ``graph``. Logs go to
standard error, results to standard output or ``--out``.

Exit status: 0 when the result is proven optimal, 3 when a timeout cut the
solve short, 2 on usage or input errors.
"""

import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from smart_csg.config import LOG_LEVELS
from smart_csg.core.coalition import CharacteristicFunction
from smart_csg.core.errors import CSGException, InvalidArgumentException, format_error_response
from smart_csg.core.ipg import build_partition_graph, reachable_subspaces
from smart_csg.distributions import GENERATOR_ID, generate, parse_spec
from smart_csg.engines.solvers import ALGORITHMS
from smart_csg.formats import ResultRecord, load_problem, records_to_csv
from smart_csg.offline.sizes import SizeSet
from smart_csg.offline.tuning import SSD_OBJECTIVES
from smart_csg.smart_csg import SmartCSG

logger = logging.getLogger("smart_csg")

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_TIMEOUT = 3


class UsageError(Exception):
    """Bad command-line input detected after argparse."""


def configure_logging(level: str):
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    try:
        logging.getLogger().setLevel(getattr(logging, level.upper()))
    except AttributeError:
        logger.warning(f"Invalid log level: {level}. Using INFO.")
        logging.getLogger().setLevel(logging.INFO)


def _floats(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise UsageError(f"Expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise UsageError(f"Expected comma-separated integers, got {text!r}")


def parse_range(text: str) -> Tuple[int, int]:
    """``A..B`` (inclusive) or a single ``N``."""
    low, sep, high = text.partition("..")
    try:
        bounds = (int(low), int(high)) if sep else (int(low), int(low))
    except ValueError:
        raise UsageError(f"Expected A..B, got {text!r}")
    if bounds[0] > bounds[1]:
        raise UsageError(f"Empty range {text!r}")
    return bounds


def _emit(text: str, out: Optional[str]):
    if out:
        os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
        with open(out, "w") as f:
            f.write(text)
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text)


def _solver(args: argparse.Namespace) -> SmartCSG:
    overrides: Dict[str, Any] = {}
    if args.log_level and args.log_level.upper() in LOG_LEVELS:
        overrides["logging_level"] = args.log_level
    if getattr(args, "ssd_objective", None) is not None:
        overrides["ssd_objective"] = args.ssd_objective
    if getattr(args, "threads", None) is not None:
        overrides["workers"] = args.threads
    if getattr(args, "deterministic", False):
        overrides["deterministic"] = True
    return SmartCSG(args.config, **overrides)


def _load_instance(args: argparse.Namespace) -> Tuple[CharacteristicFunction, Dict[str, Any]]:
    generated = args.dist is not None or args.n is not None or args.seed is not None
    if bool(args.input) == generated:
        raise UsageError("Give exactly one of --input FILE or --dist SPEC --n N --seed S")
    if args.input:
        return load_problem(args.input), {}
    if args.dist is None or args.n is None:
        raise UsageError("--dist and --n are both required to generate an instance")
    seed = args.seed or 0
    spec = parse_spec(args.dist, seed)
    return generate(spec, args.n), {"distribution": str(spec), "seed": seed, "generator": GENERATOR_ID}


def cmd_solve(args: argparse.Namespace) -> int:
    solver = _solver(args)
    v, meta = _load_instance(args)
    result = solver.solve(v, args.algo, args.tuning, args.timeout)
    record = ResultRecord.from_result(result, v.n, **meta)
    if args.format == "csv":
        _emit(records_to_csv([record]), args.out)
    else:
        _emit(json.dumps(record.model_dump(), indent=2) + "\n", args.out)
    return EXIT_OK if result.optimal else EXIT_TIMEOUT


def cmd_tune(args: argparse.Namespace) -> int:
    solver = _solver(args)
    omegas = _floats(args.omegas) if args.omegas else None
    tuning = solver.tune(args.n, omegas, args.out, args.force_idp_fallback)
    summary = {
        "n": tuning.n,
        "cdp_pair": [str(sizes) for sizes in tuning.cdp_pair],
        "ssd_objective": tuning.ssd_objective,
        "grad": {f"{omega:g}": str(sizes) for omega, sizes in tuning.grad_sets.items()},
    }
    if not args.out:
        _emit(json.dumps(summary, indent=2) + "\n", None)
    return EXIT_OK


def bench_seed(base: int, n: int, rep: int) -> int:
    """Seed of one benchmark repetition, derived from the base seed."""
    return int(np.random.SeedSequence([base, n, rep]).generate_state(1, dtype=np.uint64)[0])


def cmd_bench(args: argparse.Namespace) -> int:
    if args.threads is None:
        args.deterministic = True
    solver = _solver(args)
    dists = [d.strip() for d in args.dists.split(";" if ":" in args.dists else ",") if d.strip()]
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    unknown = sorted(set(algos) - set(ALGORITHMS))
    if unknown:
        raise UsageError(f"Unknown algorithm(s): {', '.join(unknown)}")
    for dist in dists:
        parse_spec(dist)
    low, high = parse_range(args.n_range)
    if args.reps < 0:
        raise UsageError("--reps must be non-negative")

    records: List[ResultRecord] = []
    for dist in dists:
        for n in range(low, high + 1):
            for rep in range(args.reps):
                seed = bench_seed(args.seed, n, rep)
                spec = parse_spec(dist, seed)
                meta = {"distribution": str(spec), "seed": seed, "generator": GENERATOR_ID}
                v = generate(spec, n)
                for algo in algos:
                    try:
                        result = solver.solve(v, algo, args.tuning, args.timeout)
                        records.append(ResultRecord.from_result(result, n, **meta))
                    except (CSGException, ValueError) as e:
                        logger.error(f"bench {dist} n={n} rep={rep} {algo}: {e}")
                        error = format_error_response(e, algo, n)["error"]
                        records.append(ResultRecord(n=n, algorithm=algo, status="error",
                                                    error=error.get("message"), **meta))
    _emit(records_to_csv(records), args.out)
    return EXIT_OK


def cmd_graph(args: argparse.Namespace) -> int:
    graph = build_partition_graph(args.n)
    highlight = None
    if args.sizes:
        highlight = reachable_subspaces(args.n, SizeSet.from_sizes(args.n, _ints(args.sizes)))
        logger.info(f"{len(highlight)} of {len(graph.nodes)} subspaces reachable")
    _emit(graph.to_dot(highlight), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smart-csg", description="Optimal coalition structure generation")
    parser.add_argument("--log-level", type=str, help="Logging level (default: the config value, INFO)")
    parser.add_argument("--config", type=str, help="JSON configuration file")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="Solve one instance")
    solve.add_argument("--input", type=str, help="Problem file (binary CSGV or mask,value CSV)")
    solve.add_argument("--dist", type=str, help="Distribution spec, e.g. uniform or normal:mu=5")
    solve.add_argument("--n", type=int, help="Agent count of a generated instance")
    solve.add_argument("--seed", type=int, help="Seed of a generated instance")
    solve.add_argument("--algo", choices=ALGORITHMS, default="smart")
    solve.add_argument("--tuning", type=str, help="Tuning file for smart, cdp and grad")
    solve.add_argument("--threads", type=int, help="Worker threads")
    solve.add_argument("--deterministic", action="store_true", help="Single-worker round-robin mode")
    solve.add_argument("--timeout", type=float, help="Seconds before returning the best structure so far")
    solve.add_argument("--format", choices=("json", "csv"), default="json")
    solve.add_argument("--out", type=str, help="Write the result here instead of standard output")
    solve.set_defaults(handler=cmd_solve)

    tune = sub.add_parser("tune", help="Compute size sets for n agents")
    tune.add_argument("--n", type=int, required=True)
    tune.add_argument("--omegas", type=str, help="Comma-separated coverage fractions")
    tune.add_argument("--out", type=str, help="Tuning file to write")
    tune.add_argument("--ssd-objective", choices=SSD_OBJECTIVES,
                      help="How SSD ranks covering pairs (default: minimax)")
    tune.add_argument("--force-idp-fallback", action="store_true",
                      help="Above the exact-tuning limit, use the IDP size set everywhere")
    tune.set_defaults(handler=cmd_tune)

    bench = sub.add_parser("bench", help="Benchmark algorithms on generated instances")
    bench.add_argument("--dists", type=str, default="uniform", help="Distribution specs (';' separated if any has parameters)")
    bench.add_argument("--n-range", type=str, required=True, help="A..B")
    bench.add_argument("--reps", type=int, default=1)
    bench.add_argument("--algos", type=str, default="smart", help="Comma-separated algorithms")
    bench.add_argument("--seed", type=int, default=0, help="Base seed")
    bench.add_argument("--tuning", type=str)
    bench.add_argument("--threads", type=int, help="Worker threads (default: deterministic single worker)")
    bench.add_argument("--timeout", type=float)
    bench.add_argument("--out", type=str)
    bench.set_defaults(handler=cmd_bench)

    graph = sub.add_parser("graph", help="Integer partition graph as DOT")
    graph.add_argument("--n", type=int, required=True)
    graph.add_argument("--sizes", type=str, help="Highlight subspaces reachable with these sizes")
    graph.add_argument("--out", type=str)
    graph.set_defaults(handler=cmd_graph)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main CLI entry point; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_ERROR
    configure_logging(args.log_level or "INFO")
    try:
        return args.handler(args)
    except UsageError as e:
        logger.error(str(e))
        print(json.dumps(format_error_response(InvalidArgumentException(str(e), "cli"), getattr(args, "algo", None),
                                               getattr(args, "n", None)), indent=2))
        return EXIT_ERROR
    except CSGException as e:
        logger.error(e.message)
        print(json.dumps(format_error_response(e, getattr(args, "algo", None), getattr(args, "n", None)), indent=2))
        return EXIT_ERROR
    except ValueError as e:
        logger.error(f"Invalid input: {e}")
        print(json.dumps(format_error_response(e, getattr(args, "algo", None), getattr(args, "n", None)), indent=2))
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
