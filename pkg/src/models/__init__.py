"""Data models for Proxlab files and reports."""

from .instance import InstanceFile, InstanceMetadata
from .report import BoundFlag, ReportRecord, WalkSummary
from .sweep import SweepAggregate, SweepConfig, SweepGrid

__all__ = [
    "InstanceFile",
    "InstanceMetadata",
    "BoundFlag",
    "ReportRecord",
    "WalkSummary",
    "SweepAggregate",
    "SweepConfig",
    "SweepGrid",
]
