"""generate: write an instance file from one of the generators."""

import argparse
from pathlib import Path
from typing import Any, Dict

from ...core.config import Settings
from ...lab.generators import REQUIRED_PARAMS, T_SOURCES, InstanceGenerator, certify_lower_bound
from ...models.instance import InstanceMetadata
from ...utils.codec import instance_to_file
from ...utils.instance_store import InstanceStore
from . import emit


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("generate", help="Generate an instance file")
    parser.add_argument("kind", choices=sorted(REQUIRED_PARAMS), help="Generator")
    parser.add_argument("--delta", type=int, default=None, help="Δ (lowerbound, sdm)")
    parser.add_argument("--n", type=int, default=None, help="Number of variables")
    parser.add_argument("--m", type=int, default=None, help="Number of rows (random, sdm)")
    parser.add_argument("--k", type=int, default=None, help="k (lowerbound)")
    parser.add_argument("--bound", type=int, default=3, help="Entry bound for random draws")
    parser.add_argument("--t-source", choices=T_SOURCES, default="auto", help="Source of the TU factor T (sdm)")
    parser.add_argument("--seed", type=int, default=0, help="Random seed")
    parser.add_argument("--out", type=Path, default=None, help="Output file (default: stdout)")
    parser.set_defaults(handler=run)


def _params(args: argparse.Namespace) -> Dict[str, Any]:
    params = {name: getattr(args, name) for name in REQUIRED_PARAMS[args.kind]}
    if args.kind != "lowerbound":
        params["entry_bound"] = args.bound
    if args.kind == "sdm":
        params["t_source"] = args.t_source
    return params


def run(args: argparse.Namespace, settings: Settings) -> int:
    drawn = InstanceGenerator(settings).generate(args.kind, args.seed, **_params(args))
    if drawn.lower_bound is not None:
        cert = certify_lower_bound(drawn.lower_bound, settings)
        metadata = InstanceMetadata(
            generator=drawn.kind,
            params=drawn.params,
            notes=f"certified: {'; '.join(cert.claims)}",
        )
        data = instance_to_file(drawn.instance, witness=drawn.witness, x_star=drawn.lower_bound.x_star, metadata=metadata)
    else:
        metadata = InstanceMetadata(
            generator=drawn.kind,
            seed=drawn.seed,
            params=drawn.params,
            appended_rows=drawn.appended_rows,
        )
        data = instance_to_file(drawn.instance, witness=drawn.witness, metadata=metadata)

    if args.out is None:
        emit(data, None, settings)
    else:
        InstanceStore(base_path=Path.cwd(), settings=settings).save_instance(data, args.out)
    return 0
