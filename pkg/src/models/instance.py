"""Instance file models."""

import re
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

RATIONAL_PATTERN = re.compile(r"^-?\d+(/\d+)?$")


def check_rational_string(value: Any) -> str:
    """Normalize ints to strings and check the "p" / "p/q" form."""
    if isinstance(value, bool):
        raise ValueError(f"Not a rational: {value!r}")
    if isinstance(value, int):
        return str(value)
    if not isinstance(value, str) or not RATIONAL_PATTERN.match(value.strip()):
        raise ValueError(f"Rationals are written as 'p' or 'p/q', got {value!r}")
    value = value.strip()
    if "/" in value and int(value.split("/")[1]) == 0:
        raise ValueError(f"Zero denominator in {value!r}")
    return value


class InstanceMetadata(BaseModel):
    """Provenance of an instance file."""

    generator: Optional[str] = Field(None, description="Generator kind (lowerbound, random, sdm)")
    seed: Optional[int] = Field(None, description="Seed passed to the generator")
    params: Dict[str, Any] = Field(default_factory=dict, description="Generator parameters")
    appended_rows: int = Field(default=0, ge=0, description="Rows appended to make P bounded")
    notes: Optional[str] = Field(None, description="Free-form notes")


class InstanceFile(BaseModel):
    """On-disk form of (A, b, c) with optional witnesses.

    A and b are integral; c and x_star are rational strings.
    """

    schema_version: int = Field(default=1, ge=1, description="File format version")
    A: List[List[int]] = Field(..., description="Constraint matrix, row major")
    b: List[int] = Field(..., description="Right-hand side")
    c: List[str] = Field(..., description="Objective as 'p/q' strings")
    T: Optional[List[List[int]]] = Field(None, description="Totally unimodular factor with A = T B")
    B: Optional[List[List[int]]] = Field(None, description="Square factor with A = T B")
    x_star: Optional[List[str]] = Field(None, description="Distinguished vertex, if any")
    metadata: InstanceMetadata = Field(default_factory=InstanceMetadata)

    @field_validator("c", "x_star", mode="before")
    @classmethod
    def validate_rationals(cls, v: Any) -> Any:
        """Rationals must parse with nonzero denominators."""
        if v is None:
            return v
        if not isinstance(v, list):
            raise ValueError("Expected a list of rationals")
        return [check_rational_string(x) for x in v]

    @model_validator(mode="after")
    def validate_shapes(self) -> "InstanceFile":
        """Dimensions must agree."""
        if not self.A:
            raise ValueError("A must have at least one row")
        n = len(self.A[0])
        if n == 0 or any(len(row) != n for row in self.A):
            raise ValueError("A must be a non-empty rectangular grid")
        if len(self.b) != len(self.A):
            raise ValueError(f"b has length {len(self.b)}, A has {len(self.A)} rows")
        if len(self.c) != n:
            raise ValueError(f"c has length {len(self.c)}, A has {n} columns")
        if self.x_star is not None and len(self.x_star) != n:
            raise ValueError(f"x_star has length {len(self.x_star)}, expected {n}")
        if (self.T is None) != (self.B is None):
            raise ValueError("T and B must be given together")
        if self.B is not None and self.T is not None:
            if len(self.B) != n or any(len(row) != n for row in self.B):
                raise ValueError(f"B must be {n}x{n}")
            if len(self.T) != len(self.A) or any(len(row) != n for row in self.T):
                raise ValueError(f"T must be {len(self.A)}x{n}")
        return self

    @property
    def m(self) -> int:
        return len(self.A)

    @property
    def n(self) -> int:
        return len(self.A[0])

    @property
    def has_witness(self) -> bool:
        return self.T is not None
