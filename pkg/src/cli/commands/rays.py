"""decompose-rays: split x* into primitive rays of its cone."""

import argparse
from pathlib import Path

from ...core.config import Settings
from ...core.exceptions import InstanceFormatError
from ...lab.exactmath import format_scalar
from ...lab.proximity import measure_proximity
from ...lab.spindle import ray_decomposition
from ...utils.codec import format_vector, parse_vector
from . import emit, load


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("decompose-rays", help="Ray decomposition of x* for A = T B")
    parser.add_argument("path", type=Path, help="Instance file carrying T and B")
    parser.add_argument("--out", type=Path, default=None, help="Output file (default: stdout)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, settings: Settings) -> int:
    data, inst, witness = load(args.path, settings)
    if witness is None:
        raise InstanceFormatError(f"{args.path} has no T, B witness")
    if data.x_star is not None:
        x_star = parse_vector(data.x_star)
    else:
        x_star = measure_proximity(inst, settings=settings).witness_vertex
    T, B = witness
    result = ray_decomposition(inst.A, T, B, x_star, settings)
    emit(
        {
            "x_star": format_vector(result.apex),
            "rays": [format_vector(r) for r in result.rays],
            "multiplicities": result.multiplicities,
            "length": result.length,
            "lattice_index": result.lattice_index,
            "max_ray_norm": format_scalar(result.max_ray_norm),
            "norm_bound": format_scalar(result.norm_bound),
            "chain_in_spindle": result.partial_sums_in_spindle,
            "residues_distinct": result.residues_distinct,
            "cone_rays": [format_vector(r) for r in result.cone_rays],
            "cone_rays_within_bound": result.cone_rays_within_bound,
        },
        args.out,
        settings,
    )
    holds = result.length <= result.lattice_index - 1 and result.norms_within_bound and result.cone_rays_within_bound
    return 0 if holds else 1
