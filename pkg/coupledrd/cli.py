"""Command-line entry point: coupledrd analyze|simulate|stationary|kouachi."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from coupledrd._version import __version__
from coupledrd.parser import ConfigParser, ParseError
from coupledrd.pipeline import COMMANDS, EXIT_FAILURE, run, write_error

logger = logging.getLogger(__name__)

_HELP = {
    "analyze": "Spectrum, H0 and block conditions of M; writes report.json",
    "simulate": "Time-step the system; writes frame CSVs, diagnostics.csv, meta.json",
    "stationary": "Solve the regularized stationary problem; writes solution.csv",
    "kouachi": "Run the balance-law preset; frames carry the conserved Q",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coupledrd",
        description="Well-posedness analysis and spectral solvers for coupled reaction-diffusion",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        cmd = sub.add_parser(command, help=_HELP[command])
        cmd.add_argument("--config", required=True, type=Path, help="YAML configuration file")
        cmd.add_argument("--out", type=Path, default=None,
                         help="Output directory (default: output.directory of the config)")
        cmd.add_argument("--strict", action="store_true", default=None,
                         help="Refuse Kouachi presets failing 2α > β + γ")
        cmd.add_argument("--allow-h0-violation", action="store_true",
                         help="Step matrices failing H0 anyway (experimentation only)")
        cmd.add_argument("-v", "--verbose", action="count", default=0,
                         help="-v for INFO, -vv for DEBUG")
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)

    fallback_out = args.out if args.out is not None else Path("out")
    try:
        config = ConfigParser().parse(args.config)
    except (FileNotFoundError, ParseError, ValueError) as e:
        logger.error("Configuration rejected: %s", e)
        print(f"error: {e}", file=sys.stderr)
        write_error(fallback_out, e)
        return EXIT_FAILURE

    status = run(
        args.command,
        config,
        args.out,
        strict=args.strict,
        allow_h0_violation=args.allow_h0_violation,
    )
    if status:
        print(f"{args.command} failed with exit status {status}; see error.json", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
