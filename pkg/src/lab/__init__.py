"""Exact-arithmetic proximity lab.

The sweep runner lives in ``src.lab.sweep`` and is imported from there.
"""

from .exactmath import ExactMatrix, IndexSet, delta_table, gcd_minors, hermite_unimodular, is_totally_unimodular
from .generators import (
    GeneratedInstance,
    InstanceGenerator,
    certify_lower_bound,
    gen_lower_bound,
    gen_random,
    gen_strictly_delta_modular,
)
from .lifting import LiftResult, lift, verify_lift
from .polyhedron import HPolyhedron, lattice_points, lp_max
from .proximity import (
    Instance,
    NormalizedInstance,
    ProximityReport,
    check_strictly_delta_modular_bound,
    check_volume_bound,
    kappa_d,
    kappa_I,
    kappa_profile,
    measure_proximity,
    normalize,
    planar_section,
)
from .spindle import build_spindle, certify_walk, face_path, ray_decomposition, template_walk

__all__ = [
    "ExactMatrix",
    "IndexSet",
    "delta_table",
    "gcd_minors",
    "hermite_unimodular",
    "is_totally_unimodular",
    "GeneratedInstance",
    "InstanceGenerator",
    "certify_lower_bound",
    "gen_lower_bound",
    "gen_random",
    "gen_strictly_delta_modular",
    "LiftResult",
    "lift",
    "verify_lift",
    "HPolyhedron",
    "lattice_points",
    "lp_max",
    "Instance",
    "NormalizedInstance",
    "ProximityReport",
    "check_strictly_delta_modular_bound",
    "check_volume_bound",
    "kappa_d",
    "kappa_I",
    "kappa_profile",
    "measure_proximity",
    "normalize",
    "planar_section",
    "build_spindle",
    "certify_walk",
    "face_path",
    "ray_decomposition",
    "template_walk",
]
