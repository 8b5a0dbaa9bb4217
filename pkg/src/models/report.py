"""Report models."""

from datetime import datetime
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class BoundFlag(str, Enum):
    """How a measured value compares with a bound."""

    STRICT = "strict"
    TIGHT = "tight"
    VIOLATED = "violated"
    NOT_APPLICABLE = "not-applicable"

    @property
    def holds(self) -> bool:
        return self is not BoundFlag.VIOLATED


class WalkSummary(BaseModel):
    """Serializable view of a template walk."""

    alpha: List[int] = Field(..., description="Objective direction")
    d_seq: List[int] = Field(..., description="Block sequence")
    points: List[List[str]] = Field(default_factory=list, description="x*_0, ..., x*_t = 0")
    step_values: List[str] = Field(default_factory=list, description="alpha^T (x*_i - x*_(i+1))")
    slice_bounds: List[str] = Field(default_factory=list, description="max of alpha over each slice P_(I_i)")
    slice_rows: List[List[int]] = Field(default_factory=list, description="Index sets I_i")
    slice_dimensions: List[int] = Field(default_factory=list, description="dim P_(I_i)")
    spindle_dimensions: List[int] = Field(default_factory=list, description="dim S(x*_i)")
    total: str = Field(..., description="alpha^T x*")
    total_bound: str = Field(..., description="Sum of slice bounds")
    kappa_bound: str = Field(..., description="Delta_I times the sum of slice kappas")
    template_bound_holds: Optional[bool] = Field(None, description="Comparison with the 1/1/sqrt(2) block constants")

    @property
    def steps(self) -> int:
        return len(self.step_values)


class ReportRecord(BaseModel):
    """Flattened proximity report for one instance."""

    instance_id: str = Field(..., description="Instance identifier (file stem or seed tag)")
    n: int = Field(..., ge=1, description="Number of variables")
    m: int = Field(..., ge=1, description="Number of constraints")
    proximity: Optional[str] = Field(None, description="Measured proximity")
    proximity_feasible: Optional[str] = Field(None, description="Distance to the nearest feasible lattice point")
    lp_value: Optional[str] = Field(None, description="LP optimum")
    ip_value: Optional[str] = Field(None, description="IP optimum")
    witness_vertex: Optional[List[str]] = Field(None, description="Vertex realizing the proximity")
    witness_point: Optional[List[int]] = Field(None, description="Nearest optimal lattice point")
    delta_table: List[str] = Field(default_factory=list, description="Delta_1, ..., Delta_n")
    bounds: Dict[str, Optional[str]] = Field(default_factory=dict, description="Bound values by name")
    flags: Dict[str, BoundFlag] = Field(default_factory=dict, description="Bound flags by name")
    checks: Dict[str, bool] = Field(default_factory=dict, description="Per-result pass/fail")
    check_errors: Dict[str, str] = Field(default_factory=dict, description="Error text of checks that raised, by name")
    kappa: Dict[str, str] = Field(default_factory=dict, description="Largest kappa per slice dimension")
    walk: Optional[WalkSummary] = Field(None, description="Template walk summary")
    error: Optional[str] = Field(None, description="Error message when the instance failed")
    error_type: Optional[str] = Field(None, description="Exception class name")
    timing_ms: float = Field(default=0.0, ge=0, description="Wall time")
    created_at: datetime = Field(default_factory=datetime.now, description="Report timestamp")

    @property
    def all_hold(self) -> bool:
        return all(flag.holds for flag in self.flags.values()) and all(self.checks.values())
