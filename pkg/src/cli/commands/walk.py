"""walk: certified template walk from the alpha-maximizer down to 0."""

import argparse
from pathlib import Path

from ...core.config import Settings
from ...core.exceptions import DimensionError
from ...lab.spindle import template_walk
from ...utils.codec import walk_to_summary
from . import emit, int_list, load, normalized


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("walk", help="Trace the template walk on a normalized instance")
    parser.add_argument("path", type=Path, help="Instance file (normalized first unless P ∩ Z^n = {0})")
    parser.add_argument("--alpha", type=int_list, required=True, help="Integral objective, e.g. 1,0,0")
    parser.add_argument("--d-seq", type=int_list, default=None, help="Block sequence, e.g. 3,2 (default: threes then twos)")
    parser.add_argument("--out", type=Path, default=None, help="Trace file (default: stdout)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, settings: Settings) -> int:
    _, inst, _ = load(args.path, settings)
    if len(args.alpha) != inst.n:
        raise DimensionError(f"alpha has {len(args.alpha)} entries, instance has n={inst.n}")
    norm = normalized(inst, settings)
    trace = template_walk(norm, args.alpha, args.d_seq, settings)
    emit(walk_to_summary(trace), args.out, settings)
    return 0
