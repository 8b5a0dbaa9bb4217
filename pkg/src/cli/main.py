"""
Proxlab command line.

Usage:
    python -m src.cli measure instance.json
    python -m src.cli generate lowerbound --delta 5 --n 4 --k 2 --out lb.json
    python -m src.cli sweep configs/acceptance.yaml --workers 4

Exit codes: 0 success (every applicable bound holds), 1 a bound or
certificate failed, 2 invalid input, 3 infeasible/unbounded or a failed
hypothesis, 4 resource cap exceeded.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from ..core import __version__
from ..core.config import Settings
from ..core.exceptions import ProxlabError
from ..core.logger import set_level, setup_logger
from .commands import generate, lift, measure, rays, sweep, walk

logger = setup_logger(__name__)

COMMANDS = (measure, generate, sweep, walk, lift, rays)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="proxlab", description="Exact proximity lab for integer programs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--cap-box", type=int, default=None, help="Max lattice points visited by a box scan")
    parser.add_argument("--cap-subsets", type=int, default=None, help="Max row subsets visited by an enumeration")
    parser.add_argument("--workers", type=int, default=None, help="Worker processes for sweeps")
    parser.add_argument("--output-dir", type=Path, default=None, help="Default directory for reports")
    parser.add_argument("--log-level", default=None, help="Log level (default WARNING)")
    parser.add_argument("--log-file", type=Path, default=None, help="Also log to this file")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")

    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def build_settings(args: argparse.Namespace) -> Settings:
    """Settings from flags only; unset flags keep the defaults."""
    overrides = {
        "cap_box": args.cap_box,
        "cap_subsets": args.cap_subsets,
        "sweep_workers": args.workers,
        "output_dir": args.output_dir,
    }
    level = "DEBUG" if args.verbose else (args.log_level or "WARNING").upper()
    return Settings(log_level=level, **{k: v for k, v in overrides.items() if v is not None})


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = build_settings(args)
    except ValidationError as e:
        print(f"error: invalid option: {e}", file=sys.stderr)
        return 2
    set_level(settings.log_level, args.log_file)

    try:
        return args.handler(args, settings)
    except ProxlabError as e:
        logger.error(f"{args.command} failed: {type(e).__name__}: {e}")
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
