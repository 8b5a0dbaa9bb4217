"""lift: reduce a slice P_I to a full-dimensional instance and check the identities."""

import argparse
from pathlib import Path

from ...core.config import Settings
from ...core.exceptions import DimensionError
from ...lab.exactmath import IndexSet, format_scalar
from ...lab.lifting import lift, verify_lift
from ...lab.proximity import kappa_I
from ...utils.codec import format_vector
from . import emit, int_list, load, normalized


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("lift", help="Lift the slice P_I and verify the lift identities")
    parser.add_argument("path", type=Path, help="Instance file")
    parser.add_argument("--rows", type=int_list, default=(), help="Row indices I (0-based), e.g. 0,3")
    parser.add_argument("--alpha", type=int_list, required=True, help="Integral objective")
    parser.add_argument("--out", type=Path, default=None, help="Output file (default: stdout)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, settings: Settings) -> int:
    _, inst, _ = load(args.path, settings)
    if len(args.alpha) != inst.n:
        raise DimensionError(f"alpha has {len(args.alpha)} entries, instance has n={inst.n}")
    norm = normalized(inst, settings)
    rows = IndexSet.of(args.rows, norm.base.m)
    lifted = lift(norm, args.alpha, rows, settings)
    verify_lift(norm, lifted, settings)
    emit(
        {
            "rows": list(rows),
            "alpha": list(args.alpha),
            "U": lifted.U.to_int_lists(),
            "A_hat": lifted.A_hat.to_int_lists(),
            "b_hat": format_vector(lifted.b_hat),
            "alpha_hat": format_vector(lifted.alpha_hat),
            "kappa": format_scalar(kappa_I(norm, args.alpha, rows, settings)),
            "kappa_lifted": format_scalar(lifted.kappa(settings)),
            "verified": True,
        },
        args.out,
        settings,
    )
    return 0
