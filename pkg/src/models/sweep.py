"""Sweep configuration and aggregate models."""

from datetime import datetime
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator

CHECKS = ("proximity", "kappa", "lift", "volume", "walk", "delta_modular", "lower_bound", "mahler")


class SweepGrid(BaseModel):
    """One generator grid; every combination of the listed values is drawn."""

    kind: Literal["random", "sdm", "lowerbound"] = Field(..., description="Generator kind")
    n: List[int] = Field(default_factory=list, description="Variable counts")
    m: List[int] = Field(default_factory=list, description="Row counts (random, sdm)")
    delta: List[int] = Field(default_factory=list, description="Delta values (sdm, lowerbound)")
    k: Optional[List[int]] = Field(None, description="k values (lowerbound); every valid k when omitted")
    entry_bound: int = Field(default=3, ge=1, description="Entry bound for random draws")
    count: int = Field(default=10, ge=0, description="Instances per grid point (random, sdm)")
    seed_start: int = Field(default=0, ge=0, description="First seed")
    t_source: Literal["interval", "network", "auto"] = Field(default="auto", description="Source of the TU factor T (sdm)")

    @field_validator("n", "m", "delta")
    @classmethod
    def validate_positive(cls, v: List[int]) -> List[int]:
        if any(x < 1 for x in v):
            raise ValueError("Grid values must be positive")
        return v


class SweepConfig(BaseModel):
    """A sweep: generator grids plus the checks to run on each instance."""

    name: str = Field(default="sweep", description="Sweep name used for output files")
    grids: List[SweepGrid] = Field(default_factory=list, description="Generator grids")
    checks: List[str] = Field(default_factory=lambda: list(CHECKS), description="Checks to run")
    lift_samples: int = Field(default=3, ge=0, description="Slices lifted per instance")
    mahler_samples: int = Field(default=0, ge=0, description="Random symmetric polygons for the Mahler check")

    @field_validator("checks")
    @classmethod
    def validate_checks(cls, v: List[str]) -> List[str]:
        unknown = [c for c in v if c not in CHECKS]
        if unknown:
            raise ValueError(f"Unknown checks {unknown}; choose from {list(CHECKS)}")
        return v


class SweepAggregate(BaseModel):
    """Totals over a sweep."""

    name: str = Field(..., description="Sweep name")
    instances: int = Field(default=0, ge=0, description="Instances processed")
    failures: int = Field(default=0, ge=0, description="Instances that raised")
    violations: List[Dict[str, str]] = Field(default_factory=list, description="Failed bounds and checks")
    check_counts: Dict[str, int] = Field(default_factory=dict, description="Checks run, by name")
    max_kappa: Dict[str, str] = Field(default_factory=dict, description="Largest kappa per slice dimension")
    kappa3_squared: Optional[str] = Field(None, description="Square of the largest kappa_3 (compare with 2)")
    max_proximity_ratio: Optional[str] = Field(None, description="Largest proximity / ((n/2) Delta_(n-1))")
    elapsed_sec: float = Field(default=0.0, ge=0, description="Wall time")
    created_at: datetime = Field(default_factory=datetime.now, description="Aggregate timestamp")

    @property
    def passed(self) -> bool:
        return not self.violations and self.failures == 0
