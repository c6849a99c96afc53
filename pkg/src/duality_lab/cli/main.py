"""Command-line entry point: ``duality-lab run`` and ``duality-lab verify``."""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

import structlog

from duality_lab import __version__
from duality_lab.cli.runner import resolve_output_dir, run_scenario, write_json
from duality_lab.cli.scenario import bundled_scenarios, load_scenario
from duality_lab.cli.verification import SUITES, VerificationReport, run_suite
from duality_lab.config import get_settings
from duality_lab.errors import DualityLabError
from duality_lab.log_config import configure_logging
from duality_lab.mutations import MUTATIONS

logger = structlog.get_logger()

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIGURATION = 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="Output directory (default: $DUALITY_LAB_OUTPUT_DIR or ./out)")
    common.add_argument("--seed", type=int, default=None, help="Seed for random FD-oracle sites; overrides the config")
    common.add_argument(
        "--mutate",
        action="append",
        default=[],
        choices=sorted(MUTATIONS),
        help="Inject a named fault to show that the checks guarding it fail (repeatable)",
    )
    common.add_argument("--log-level", default=None, help="Log level (default from DUALITY_LAB_LOG_LEVEL)")
    common.add_argument("--debug", action="store_true", help="Human-readable console logs")

    parser = argparse.ArgumentParser(prog="duality-lab", description="Corpuscular/wave duality numerical lab")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", parents=[common], help="Run a scenario file or a bundled scenario")
    run.add_argument("config", help=f"Scenario YAML path or bundled name ({', '.join(bundled_scenarios())})")

    verify = commands.add_parser("verify", parents=[common], help="Run an acceptance suite")
    verify.add_argument("suite", choices=sorted(SUITES), help="quick: A1-A4; full: A1-A6 with convergence tables")
    return parser


def print_summary(report: VerificationReport, output_dir: Path) -> None:
    for criterion, passed in report.criteria.items():
        print(f"{criterion:<12} {'PASS' if passed else 'FAIL'}")
    for check in report.failed():
        print(f"  failed: [{check.criterion}] {check.name}: {check.measured:.3e} {check.comparison.value} {check.tolerance:.3e}")
    print(f"report written to {output_dir}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    settings = get_settings()
    configure_logging(args.log_level or settings.log_level, args.debug or settings.debug)
    output_dir = resolve_output_dir(args.out, settings)

    try:
        if args.command == "run":
            config = load_scenario(args.config)
            report = run_scenario(config, output_dir, seed=args.seed, mutate=args.mutate, settings=settings).report
        else:
            report = run_suite(args.suite, seed=args.seed, mutate=args.mutate, settings=settings)
            output_dir.mkdir(parents=True, exist_ok=True)
            write_json(output_dir / f"verification_{args.suite}.json", report.model_dump(mode="json"))
    except DualityLabError as exc:
        logger.error("Configuration error", error=str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIGURATION

    print_summary(report, output_dir)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
