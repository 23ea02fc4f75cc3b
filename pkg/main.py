# Directory: parallel-ist/main.py
"""
Command-line entry point for the parallel interpolation search tree
Runs timed benchmarks (table or CSV) and the property self-test
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError
from rich.console import Console

from models.bench_models import DEFAULT_RANGE_MAX, DistributionKind, OpMix, RunSpec
from parallel_ist.configuration import TreeConfig
from parallel_ist.errors import ConfigurationError, ISTError
from services.bench_service import BenchService
from services.selftest_service import SCALES, SelftestService
from utils.metrics import render_table, write_csv

# Configure logging with Google Standards
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

THREADS_ENV = "IST_THREADS"


def resolve_threads(flag: Optional[int]) -> int:
    """--threads wins; IST_THREADS applies only when the flag is absent; default 1."""
    if flag is not None:
        return flag
    value = os.getenv(THREADS_ENV)
    if value is None:
        return 1
    try:
        return int(value)
    except ValueError as e:
        raise ConfigurationError(f"{THREADS_ENV} must be an integer, got '{value}'") from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parallel-ist",
        description="Parallel batched interpolation search tree: benchmark and self-test",
    )
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="Time prefill and batch phases")
    bench.add_argument("--n", type=int, default=10**6, help="Prefill size")
    bench.add_argument("--batch-size", type=int, default=10**5, help="Operations per batch")
    bench.add_argument("--batches", type=int, default=1, help="Number of batches")
    bench.add_argument("--dist", choices=[kind.value for kind in DistributionKind],
                       default=DistributionKind.UNIFORM_SUBSET.value, help="Prefill key distribution")
    bench.add_argument("--range-max", type=int, default=DEFAULT_RANGE_MAX, help="Keys drawn from [1, range-max]")
    bench.add_argument("--alpha", type=float, default=0.5, help="ID table exponent in [0.5, 1)")
    bench.add_argument("--threads", type=int, default=None, help=f"Worker threads (falls back to {THREADS_ENV})")
    bench.add_argument("--seed", type=int, default=42, help="Workload seed")
    bench.add_argument("--repeats", type=int, default=10, help="Timed repetitions")
    bench.add_argument("--mix", choices=[mix.value for mix in OpMix], default=OpMix.INSERT.value,
                       help="Batch operation mix")
    bench.add_argument("--format", choices=["table", "csv"], default="table", help="Output format")
    bench.add_argument("--out", default=None, help="Write output to this path instead of stdout")
    bench.add_argument("--no-baseline", action="store_true", help="Skip the SortedSet baseline")

    selftest = sub.add_parser("selftest", help="Run the property suites")
    selftest.add_argument("--scale", choices=sorted(SCALES), default="small", help="Instance sizes")
    selftest.add_argument("--threads", type=int, default=None, help=f"Worker threads (falls back to {THREADS_ENV})")
    selftest.add_argument("--seed", type=int, default=7, help="Base seed")
    selftest.add_argument("--corrupt", action="store_true", help="Damage a node counter before validation")
    return parser


def run_bench(args: argparse.Namespace) -> int:
    try:
        spec = RunSpec(
            n=args.n,
            batch_size=args.batch_size,
            batches=args.batches,
            dist=args.dist,
            range_max=args.range_max,
            alpha=args.alpha,
            threads=resolve_threads(args.threads),
            seed=args.seed,
            repeats=args.repeats,
            mix=args.mix,
        )
    except ValidationError as e:
        raise ConfigurationError(str(e)) from e

    logger.info(f"Running benchmark: {spec.model_dump()}")
    report = BenchService(TreeConfig.from_env({"alpha": spec.alpha}), baseline=not args.no_baseline).run(spec)

    if args.format == "csv":
        if args.out:
            write_csv(report.rows, args.out)
        else:
            write_csv(report.rows, sys.stdout)
    elif args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            render_table(report.rows, Console(file=handle, width=160))
    else:
        render_table(report.rows)

    logger.info(
        f"Final size {report.final_size}, outcomes sha256 {report.outcomes_digest[:16]}, "
        f"dump sha256 {report.dump_digest[:16]}, deterministic={report.deterministic}"
    )
    return 0 if report.deterministic else 1


def run_selftest(args: argparse.Namespace) -> int:
    report = SelftestService(args.scale, args.seed, resolve_threads(args.threads), args.corrupt).run()
    console = Console()
    for result in report.results:
        status = "[green]ok[/green]" if result.passed else "[red]FAIL[/red]"
        console.print(f"{status} {result.name} ({result.duration:.2f}s) {result.detail}")
    failure = report.first_failure
    if failure is not None:
        print(f"selftest failed: {failure.name}: {failure.detail}", file=sys.stderr)
        return 1
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    try:
        if args.command == "bench":
            return run_bench(args)
        return run_selftest(args)
    except ISTError as e:
        logger.error(f"{type(e).__name__}: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
