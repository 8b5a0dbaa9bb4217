"""sweep: run the checks over generator grids."""

import argparse
from pathlib import Path

from ...core.config import Settings
from ...lab.sweep import SweepRunner
from ...utils.instance_store import InstanceStore


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("sweep", help="Run a sweep configuration (YAML or JSON)")
    parser.add_argument("config", type=Path, help="Sweep configuration file")
    parser.add_argument("--out-dir", type=Path, default=None, help="Directory for <name>.json and <name>.csv")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, settings: Settings) -> int:
    store = InstanceStore(base_path=Path.cwd(), settings=settings)
    config = store.load_sweep_config(args.config)
    if not config.grids and not config.mahler_samples:
        print(f"sweep '{config.name}': nothing to run")
        return 0

    aggregate, records = SweepRunner(settings).run(config)
    paths = store.save_aggregate(aggregate, records, args.out_dir or settings.output_dir)

    print(f"sweep       {aggregate.name}")
    print(f"instances   {aggregate.instances} ({aggregate.failures} failed)")
    for name, count in sorted(aggregate.check_counts.items()):
        print(f"  {name:<20} {count}")
    for d, value in aggregate.max_kappa.items():
        print(f"max kappa_{d}  {value}")
    if aggregate.kappa3_squared is not None:
        print(f"kappa_3^2   {aggregate.kappa3_squared} (limit 2)")
    if aggregate.max_proximity_ratio is not None:
        print(f"max ratio   {aggregate.max_proximity_ratio} of (n/2) Delta_(n-1)")
    print(f"violations  {len(aggregate.violations)}")
    for v in aggregate.violations[:20]:
        detail = f" ({v['error']})" if "error" in v else ""
        print(f"  {v['instance_id']}: {v['check']}{detail}")
    print(f"written     {paths['json']}, {paths['csv']}")
    return 0 if aggregate.passed else 1
