"""measure: proximity and every applicable bound for one instance file."""

import argparse
import time
from pathlib import Path

from ...core.config import Settings
from ...lab.proximity import measure_proximity
from ...utils.codec import report_to_record
from . import emit, load


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("measure", help="Measure proximity and compare with the bounds")
    parser.add_argument("path", type=Path, help="Instance file (JSON)")
    parser.add_argument("--out", type=Path, default=None, help="Report path (default: <output_dir>/<stem>.report.json)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, settings: Settings) -> int:
    _, inst, witness = load(args.path, settings)
    start = time.time()
    report = measure_proximity(inst, witness=witness, settings=settings)
    record = report_to_record(report, args.path.stem, inst, (time.time() - start) * 1000)

    out = args.out or settings.output_dir / f"{args.path.stem}.report.json"
    emit(record, out, settings)

    print(f"instance   {record.instance_id} ({record.m}x{record.n})")
    print(f"proximity  {record.proximity} (feasible points: {record.proximity_feasible})")
    print(f"delta      {' '.join(record.delta_table)}")
    for name, flag in record.flags.items():
        print(f"{name:<14} {flag.value:<15} bound {record.bounds.get(name)}")
    print(f"report     {out}")
    return 0 if report.all_hold else 1
