"""Console entry point for the ``illposed`` benchmark tool."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from ._utils_runner import (
    check_discrepancy,
    fit_rate,
    format_float,
    group_records,
    read_csv,
    write_csv,
    write_plot_data,
)
from .config import load_config
from .const import EXIT_ACCEPTANCE, EXIT_CONFIG, EXIT_METHOD, EXIT_OK, NAME
from .exceptions import AcceptanceError, ConfigValidationError, IllPosedError
from .runner import run_experiment
from .selftest import run_selftest

_LOGGER = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser with the run, rates and selftest commands."""
    parser = argparse.ArgumentParser(prog=NAME, description="Regularization benchmarks for ill-posed problems.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log debug output")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run one experiment configuration")
    run.add_argument("--config", required=True, type=Path, help="experiment JSON file")
    run.add_argument("--out", type=Path, default=Path("."), help="output directory (default: current)")
    run.add_argument("--threads", type=int, default=1, help="concurrent solves (default: 1)")
    run.add_argument("--timing", action="store_true", help="write measured wall times instead of 0")

    rates = commands.add_parser("rates", help="fit convergence rates from a results CSV")
    rates.add_argument("--csv", required=True, type=Path, help="results file written by 'run'")
    rates.add_argument("--group", choices=("method", "rule", "method_rule"), default="method")
    rates.add_argument("--aggregate", choices=("median", "mean"), default="median")

    commands.add_parser("selftest", help="run the reduced acceptance suite")
    return parser


def _run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    records = run_experiment(config, threads=args.threads)
    for record in records:
        check_discrepancy(record)
    csv_path = args.out / config.output
    count = write_csv(records, csv_path, include_timing=args.timing)
    plots = write_plot_data(records, args.out, Path(config.output).stem, config.aggregate)
    _LOGGER.info("Wrote %d records to %s and %d plot-data files", count, csv_path, len(plots))
    return EXIT_OK


def _rates(args: argparse.Namespace) -> int:
    records = read_csv(args.csv)
    print("group,slope,intercept,residual,points")
    for label, group in group_records(records, args.group).items():
        fit = fit_rate(group, args.aggregate)
        print(
            f"{label},{format_float(fit.slope)},{format_float(fit.intercept)},"
            f"{format_float(fit.residual)},{fit.points}"
        )
    return EXIT_OK


def _selftest(_args: argparse.Namespace) -> int:
    elapsed = run_selftest()
    print(f"selftest passed in {elapsed:.1f} s")
    return EXIT_OK


COMMANDS = {"run": _run, "rates": _rates, "selftest": _selftest}


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, dispatch the command and map failures to exit codes."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except ConfigValidationError as err:
        _LOGGER.error("Invalid configuration: %s", err)
        return EXIT_CONFIG
    except AcceptanceError as err:
        _LOGGER.error("Selftest failed: %s", err)
        return EXIT_ACCEPTANCE
    except IllPosedError as err:
        notes = "; ".join(getattr(err, "__notes__", ()))
        _LOGGER.error("Method failed: %s%s", err, f" ({notes})" if notes else "")
        return EXIT_METHOD


if __name__ == "__main__":
    sys.exit(main())
