"""Conversions between lab objects and their file models."""

from typing import Any, Dict, List, Optional, Sequence, Tuple

from ..core.config import settings
from ..core.exceptions import InstanceFormatError
from ..lab.exactmath import ExactMatrix, Vector, format_scalar, to_scalar
from ..lab.proximity import Instance, ProximityReport
from ..lab.spindle import WalkTrace
from ..models.instance import InstanceFile, InstanceMetadata
from ..models.report import ReportRecord, WalkSummary

Witness = Tuple[ExactMatrix, ExactMatrix]


def format_vector(values: Sequence[Any]) -> List[str]:
    return [format_scalar(to_scalar(x)) for x in values]


def parse_vector(values: Sequence[str]) -> Vector:
    return tuple(to_scalar(x) for x in values)


def instance_to_file(
    inst: Instance,
    witness: Optional[Witness] = None,
    x_star: Optional[Sequence[Any]] = None,
    metadata: Optional[InstanceMetadata] = None,
) -> InstanceFile:
    """Instance (and optional T, B witness) as an InstanceFile."""
    T, B = witness if witness is not None else (None, None)
    return InstanceFile(
        schema_version=settings.schema_version,
        A=inst.A.to_int_lists(),
        b=[int(x) for x in inst.b],
        c=format_vector(inst.c),
        T=T.to_int_lists() if T is not None else None,
        B=B.to_int_lists() if B is not None else None,
        x_star=format_vector(x_star) if x_star is not None else None,
        metadata=metadata or InstanceMetadata(),
    )


def file_to_instance(data: InstanceFile) -> Tuple[Instance, Optional[Witness]]:
    """Build the lab Instance and witness from a validated file."""
    if data.schema_version > settings.schema_version:
        raise InstanceFormatError(f"Unsupported schema version {data.schema_version}")
    inst = Instance(ExactMatrix(data.A), tuple(data.b), parse_vector(data.c))
    witness = None
    if data.T is not None and data.B is not None:
        witness = (ExactMatrix(data.T, cols=data.n), ExactMatrix(data.B, cols=data.n))
    return inst, witness


def _opt(value: Any) -> Optional[str]:
    return None if value is None else format_scalar(to_scalar(value))


def report_to_record(report: ProximityReport, instance_id: str, inst: Instance, timing_ms: float = 0.0) -> ReportRecord:
    """Flatten a ProximityReport; the per-result checks mirror the flags."""
    template = report.bound_template
    bounds: Dict[str, Optional[str]] = {
        "cook": _opt(report.bound_cook),
        "cook_footnote": _opt(report.bound_cook_footnote),
        "main": _opt(report.bound_main),
        "template": f"{format_scalar(template[0])}*({template[1]}*sqrt(2) + {template[2] + template[3]})",
        "tu": _opt(report.bound_tu),
    }
    return ReportRecord(
        instance_id=instance_id,
        n=inst.n,
        m=inst.m,
        proximity=_opt(report.proximity),
        proximity_feasible=_opt(report.proximity_feasible),
        lp_value=_opt(report.lp_value),
        ip_value=_opt(report.ip_value),
        witness_vertex=format_vector(report.witness_vertex) if report.witness_vertex is not None else None,
        witness_point=list(report.witness_point) if report.witness_point is not None else None,
        delta_table=format_vector(report.delta_table),
        bounds=bounds,
        flags=dict(report.flags),
        checks={name: flag.holds for name, flag in report.flags.items()},
        timing_ms=round(timing_ms, 2),
    )


def walk_to_summary(trace: WalkTrace) -> WalkSummary:
    return WalkSummary(
        alpha=[int(x) for x in trace.alpha],
        d_seq=list(trace.d_seq),
        points=[format_vector(p) for p in trace.points],
        step_values=[format_scalar(s.step_value) for s in trace.steps],
        slice_bounds=[format_scalar(s.slice_max) for s in trace.steps],
        slice_rows=[list(s.slice_rows) for s in trace.steps],
        slice_dimensions=[s.slice_dimension for s in trace.steps],
        spindle_dimensions=[s.spindle_dimension for s in trace.steps],
        total=format_scalar(trace.total),
        total_bound=format_scalar(trace.total_bound),
        kappa_bound=format_scalar(trace.kappa_bound),
        template_bound_holds=trace.template_bound_holds(),
    )
