"""
Proximity - Delta parameters, measured proximity and bound checks.

Measures the largest infinity-distance between an optimal LP vertex and the
nearest optimal integral point, moves instances into the normal form where
the only lattice point is the origin, and checks each proximity bound
exactly on concrete instances.
"""

from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Integer, Rational

from ..core.config import Settings, get_settings
from ..core.exceptions import (
    DegenerateObjectiveError,
    DimensionError,
    HypothesisError,
    InfeasibleError,
    IntegralityError,
    ParameterError,
    ProxlabError,
    RankDeficiencyError,
    ResourceCapError,
    UnboundedError,
)
from ..core.logger import setup_logger
from ..models.report import BoundFlag
from .exactmath import (
    ONE,
    ZERO,
    ExactMatrix,
    IndexSet,
    Vector,
    det,
    dot,
    gcd_minors,
    inf_norm,
    is_integral_vector,
    is_totally_unimodular,
    max_abs_minor,
    norm2_squared,
    sub,
    unit_vector,
    vector,
)
from .polyhedron import (
    HPolyhedron,
    LatticePoint,
    VertexCertificate,
    area_2d,
    convex_hull_2d,
    dimension,
    dual_feasible_basis,
    is_bounded,
    lattice_points,
    lp_max,
    optimal_vertices,
    polygon_area,
    symmetric_polygon,
    volume_low_dim,
)

logger = setup_logger(__name__)


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    """(A, b, c) with A integral of full column rank and b integral."""

    A: ExactMatrix
    b: Vector
    c: Vector

    def __post_init__(self) -> None:
        object.__setattr__(self, "b", vector(self.b))
        object.__setattr__(self, "c", vector(self.c))
        if len(self.b) != self.A.rows:
            raise DimensionError(f"A has {self.A.rows} rows but b has length {len(self.b)}")
        if len(self.c) != self.A.cols:
            raise DimensionError(f"A has {self.A.cols} columns but c has length {len(self.c)}")
        self.A.require_integral("Instance")
        if not is_integral_vector(self.b):
            raise IntegralityError("The right-hand side b must be integral")
        if self.A.rank() != self.A.cols:
            raise RankDeficiencyError(f"A must have full column rank {self.A.cols}")

    @property
    def m(self) -> int:
        return self.A.rows

    @property
    def n(self) -> int:
        return self.A.cols

    @property
    def polyhedron(self) -> HPolyhedron:
        return HPolyhedron(self.A, self.b)


@dataclass(frozen=True)
class NormalizedInstance:
    """An instance whose polyhedron meets the integer lattice only in 0."""

    base: Instance
    translated_optimum_at_origin: bool
    source: Optional[Instance] = None
    shift: Tuple[int, ...] = ()
    optimal_vertex: Optional[Vector] = None
    basis: Optional[IndexSet] = None

    @property
    def polyhedron(self) -> HPolyhedron:
        return self.base.polyhedron

    @property
    def n(self) -> int:
        return self.base.n

    @classmethod
    def assume(cls, inst: Instance, settings: Optional[Settings] = None) -> "NormalizedInstance":
        """Wrap an instance already meeting Z^n only in 0 (verified)."""
        points = lattice_points(inst.polyhedron, settings=settings)
        if points != [tuple(0 for _ in range(inst.n))]:
            raise HypothesisError("P ∩ Z^n = {0}", f"lattice points are {points[:5]}")
        return cls(base=inst, translated_optimum_at_origin=True, source=inst, shift=tuple(0 for _ in range(inst.n)))


@dataclass
class ProximityReport:
    """Measured proximity, Delta table, bound values and flags."""

    proximity: Rational
    proximity_feasible: Rational
    delta_table: List[Rational]
    bound_cook: Rational
    bound_cook_footnote: Rational
    bound_main: Optional[Rational]
    bound_template: Tuple[Rational, int, int, int]
    bound_tu: Optional[Rational] = None
    flags: Dict[str, BoundFlag] = field(default_factory=dict)
    lp_value: Optional[Rational] = None
    ip_value: Optional[Rational] = None
    witness_vertex: Optional[Vector] = None
    witness_point: Optional[LatticePoint] = None
    optimal_vertex_count: int = 0
    optimal_point_count: int = 0

    @property
    def all_hold(self) -> bool:
        return all(flag.holds for flag in self.flags.values())

    def delta(self, k: int) -> Rational:
        """Delta_k with the convention Delta_0 = 1."""
        return ONE if k == 0 else self.delta_table[k - 1]


# ---------------------------------------------------------------------------
# Exact helpers
# ---------------------------------------------------------------------------


def lt_rational_plus_sqrt2(p: Rational, c: Rational, a: Rational) -> bool:
    """Decide p < c + a*sqrt(2) exactly (a >= 0)."""
    if a < 0:
        raise ParameterError("Coefficient of sqrt(2) must be non-negative")
    u = p - c
    if u < 0:
        return True
    return bool(u * u < 2 * a * a)


def default_block_sequence(d: int) -> Tuple[int, ...]:
    """Threes then twos, with as few twos as possible, summing to d."""
    if d < 1:
        raise ParameterError(f"Block sequence needs a positive dimension, got {d}")
    if d == 1:
        return (1,)
    remainder = d % 3
    if remainder == 0:
        return (3,) * (d // 3)
    if remainder == 2:
        return (3,) * (d // 3) + (2,)
    return (3,) * ((d - 4) // 3) + (2, 2)


def delta_k(A: ExactMatrix, k: int, settings: Optional[Settings] = None) -> Rational:
    """Delta_k(A) with Delta_0 = 1."""
    return ONE if k == 0 else max_abs_minor(A, k, settings)


def _classify(value: Rational, bound: Optional[Rational], strict: bool) -> BoundFlag:
    if bound is None:
        return BoundFlag.NOT_APPLICABLE
    if value < bound:
        return BoundFlag.STRICT
    if value == bound:
        return BoundFlag.VIOLATED if strict else BoundFlag.TIGHT
    return BoundFlag.VIOLATED


def _distance(x: Sequence[Rational], z: Sequence[int]) -> Rational:
    return inf_norm(sub(x, vector(z)))


# ---------------------------------------------------------------------------
# Delta_I and proximity
# ---------------------------------------------------------------------------


def delta_I(A: ExactMatrix, alpha: Sequence[object], I: IndexSet, settings: Optional[Settings] = None) -> Rational:
    """(1/gcd A_I) * max |det(alpha ; A_K)| over I ⊆ K, |K| = n - 1.

    Raises:
        RankDeficiencyError: the rows A_I are dependent
    """
    alpha = vector(alpha)
    m, n = A.shape
    I = IndexSet.of(I, m)
    if len(I) > n - 1:
        raise DimensionError(f"|I| = {len(I)} exceeds n - 1 = {n - 1}")
    if I and A.select_rows(I).rank() != len(I):
        raise RankDeficiencyError(f"Rows {I.members} are linearly dependent")
    divisor = gcd_minors(A.select_rows(I), settings) if I else ONE
    others = [i for i in range(m) if i not in I]
    need = n - 1 - len(I)
    cap = (settings or get_settings()).cap_subsets
    if comb(len(others), need) > cap:
        raise ResourceCapError(f"delta_I would visit {comb(len(others), need)} subsets (cap {cap})")
    best = ZERO
    for extra in combinations(others, need):
        K = sorted(set(I) | set(extra))
        value = abs(det(A.select_rows(K).with_row_first(alpha)))
        if value > best:
            best = value
    return best / divisor


def measure_proximity(
    inst: Instance,
    witness: Optional[Tuple[ExactMatrix, ExactMatrix]] = None,
    settings: Optional[Settings] = None,
) -> ProximityReport:
    """Measure proximity of an instance and evaluate every bound.

    Args:
        inst: Instance with bounded polyhedron and feasible IP
        witness: Optional (T, B) with A = T B; enables the strictly
            Delta-modular bound
        settings: Resource caps

    Raises:
        UnboundedError: P is unbounded
        InfeasibleError: P is empty or has no lattice points
    """
    settings = settings or get_settings()
    P = inst.polyhedron
    if not is_bounded(P, settings):
        raise UnboundedError("measure_proximity needs a bounded polyhedron")
    lp_value, vertices = optimal_vertices(P, inst.c, settings)
    points = lattice_points(P, settings=settings)
    if not points:
        raise InfeasibleError("The integer program is infeasible")

    ip_value = max(dot(inst.c, vector(z)) for z in points)
    optimal_points = [z for z in points if dot(inst.c, vector(z)) == ip_value]

    proximity = ZERO
    witness_pair: Tuple[Optional[Vector], Optional[LatticePoint]] = (None, None)
    for v in vertices:
        nearest = min(optimal_points, key=lambda z: (_distance(v.point, z), z))
        gap = _distance(v.point, nearest)
        if witness_pair[0] is None or gap > proximity:
            proximity, witness_pair = gap, (v.point, nearest)
    proximity_feasible = max(min(_distance(v.point, z) for z in points) for v in vertices)

    n = inst.n
    table = [max_abs_minor(inst.A, k, settings) for k in range(1, n + 1)]
    delta_prev = ONE if n == 1 else table[n - 2]
    bound_cook = n * max(table)
    bound_footnote = n * delta_prev
    bound_main = Rational(n, 2) * delta_prev if n >= 2 else None
    blocks = default_block_sequence(n)
    template = (delta_prev, blocks.count(3), blocks.count(2), blocks.count(1))

    bound_tu = None
    if witness is not None:
        T, B = witness
        _check_decomposition(inst.A, T, B, table[-1], settings)
        bound_tu = max(delta_prev, table[-1]) - 1

    flags = {
        "cook": _classify(proximity, bound_cook, strict=False),
        "cook_footnote": _classify(proximity, bound_footnote, strict=False),
        "main": _classify(proximity, bound_main, strict=True),
        "template": BoundFlag.STRICT
        if lt_rational_plus_sqrt2(proximity, template[0] * (template[2] + template[3]), template[0] * template[1])
        else BoundFlag.VIOLATED,
        "tu": _classify(proximity, bound_tu, strict=False),
    }
    report = ProximityReport(
        proximity=proximity,
        proximity_feasible=proximity_feasible,
        delta_table=table,
        bound_cook=bound_cook,
        bound_cook_footnote=bound_footnote,
        bound_main=bound_main,
        bound_template=template,
        bound_tu=bound_tu,
        flags=flags,
        lp_value=lp_value,
        ip_value=ip_value,
        witness_vertex=witness_pair[0],
        witness_point=witness_pair[1],
        optimal_vertex_count=len(vertices),
        optimal_point_count=len(optimal_points),
    )
    violated = [name for name, flag in flags.items() if flag is BoundFlag.VIOLATED]
    if violated:
        logger.warning(f"Bounds violated: {violated} (proximity={proximity})")
    logger.info(f"Measured proximity {proximity} on a {inst.m}x{n} instance")
    return report


def normalize(inst: Instance, settings: Optional[Settings] = None) -> NormalizedInstance:
    """Cut P down to the cone at the optimal basis and move z* to the origin.

    The rows -A_{I*} x <= -A_{I*} z* are appended, where x* is the optimal
    vertex realizing the measured proximity and z* is the optimal integral
    point preferred by the perturbed objective 1^T A_{I*}, nearest to x*.

    Raises:
        InfeasibleError: the integer program is infeasible
    """
    settings = settings or get_settings()
    report = measure_proximity(inst, settings=settings)
    P = inst.polyhedron
    _, vertices = optimal_vertices(P, inst.c, settings)
    x_star: VertexCertificate = next(v for v in vertices if v.point == report.witness_vertex)
    # c must lie in the cone of A_{I*} for the appended rows to isolate z*
    I_star = dual_feasible_basis(P, inst.c, x_star, settings)
    A_star = inst.A.select_rows(I_star)

    points = lattice_points(P, settings=settings)
    optimal_points = [z for z in points if dot(inst.c, vector(z)) == report.ip_value]
    perturb = A_star.left_apply([1] * len(I_star))
    top = max(dot(perturb, vector(z)) for z in optimal_points)
    preferred = [z for z in optimal_points if dot(perturb, vector(z)) == top]
    z_star = min(preferred, key=lambda z: (_distance(x_star.point, z), z))

    A_bar = inst.A.vstack(-A_star)
    b_bar = inst.b + tuple(-x for x in A_star.apply(z_star))
    shifted_b = sub(b_bar, A_bar.apply(z_star))
    base = Instance(A_bar, shifted_b, inst.c)

    origin = tuple(0 for _ in range(inst.n))
    found = lattice_points(base.polyhedron, settings=settings)
    if found != [origin]:
        raise ProxlabError(f"Normalization left lattice points {found[:5]}")
    logger.info(f"Normalized {inst.m}x{inst.n} instance around z*={z_star}")
    return NormalizedInstance(
        base=base,
        translated_optimum_at_origin=True,
        source=inst,
        shift=tuple(z_star),
        optimal_vertex=sub(x_star.point, vector(z_star)),
        basis=I_star,
    )


def normalized_width(norm: NormalizedInstance, settings: Optional[Settings] = None) -> Rational:
    """max ||x||_inf over P, the proximity surrogate after normalization."""
    P = norm.polyhedron
    n = norm.n
    return max(
        lp_max(P, unit_vector(n, i, sign), settings)[0]
        for i in range(n)
        for sign in (1, -1)
    )


# ---------------------------------------------------------------------------
# kappa
# ---------------------------------------------------------------------------


def kappa_I(norm: NormalizedInstance, alpha: Sequence[object], I: IndexSet, settings: Optional[Settings] = None) -> Rational:
    """max alpha^T x over the slice P_I, in units of Delta_I(A, alpha).

    Raises:
        DegenerateObjectiveError: Delta_I(A, alpha) = 0
    """
    A = norm.base.A
    I = IndexSet.of(I, A.rows)
    scale = delta_I(A, alpha, I, settings)
    if scale == 0:
        raise DegenerateObjectiveError(f"Delta_I(A, alpha) = 0 for I={I.members}")
    value, _ = lp_max(norm.polyhedron.slice(I), vector(alpha), settings)
    return value / scale


def kappa_profile(
    norm: NormalizedInstance, alpha: Sequence[object], settings: Optional[Settings] = None
) -> Dict[int, Tuple[Rational, IndexSet]]:
    """For every slice dimension d, the largest kappa_I and a maximizing I."""
    settings = settings or get_settings()
    A = norm.base.A
    m, n = A.shape
    total = sum(comb(m, j) for j in range(n))
    if total > settings.cap_subsets:
        raise ResourceCapError(f"kappa_profile would visit {total} subsets (cap {settings.cap_subsets})")
    P = norm.polyhedron
    alpha = vector(alpha)
    profile: Dict[int, Tuple[Rational, IndexSet]] = {}
    for size in range(n):
        for rows in combinations(range(m), size):
            I = IndexSet(rows)
            if size and A.select_rows(I).rank() != size:
                continue
            scale = delta_I(A, alpha, I, settings)
            if scale == 0:
                logger.debug(f"Skipping I={rows}: Delta_I = 0")
                continue
            sliced = P.slice(I)
            d = dimension(sliced, settings)
            value = lp_max(sliced, alpha, settings)[0] / scale
            if d not in profile or value > profile[d][0]:
                profile[d] = (value, I)
    return profile


def kappa_d(norm: NormalizedInstance, alpha: Sequence[object], d: int, settings: Optional[Settings] = None) -> Rational:
    """max of kappa_I over all independent I with dim P_I = d.

    Raises:
        ParameterError: no slice has dimension d
    """
    profile = kappa_profile(norm, alpha, settings)
    if d not in profile:
        raise ParameterError(f"No slice of dimension {d}")
    return profile[d][0]


# ---------------------------------------------------------------------------
# Volume bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VolumeBoundCheck:
    """Both sides of kappa^2 vol^2 Delta^2 < 4^(n-1) ||alpha||^2."""

    kappa: Rational
    volume_squared: Rational
    delta: Rational
    lhs: Rational
    rhs: Rational

    @property
    def holds(self) -> bool:
        return bool(self.lhs < self.rhs)


def alpha_section(A: ExactMatrix, alpha: Sequence[object]) -> HPolyhedron:
    """P_alpha = {x : |A x| <= 1, alpha^T x = 0}."""
    alpha = vector(alpha)
    rows = list(A.row_list()) + [tuple(-x for x in r) for r in A.row_list()] + [alpha]
    rhs = [ONE] * (2 * A.rows) + [ZERO]
    return HPolyhedron(ExactMatrix(rows), tuple(rhs), IndexSet((len(rows) - 1,)))


def check_volume_bound(norm: NormalizedInstance, alpha: Sequence[object], settings: Optional[Settings] = None) -> VolumeBoundCheck:
    """Exact squared form of the volume bound for full-dimensional n in {2, 3}.

    Raises:
        DimensionError: n outside {2, 3} or P not full-dimensional
    """
    A = norm.base.A
    n = A.cols
    if n not in (2, 3):
        raise DimensionError(f"The volume bound is checked for n in {{2, 3}}, got {n}")
    if dimension(norm.polyhedron, settings) != n:
        raise DimensionError("The volume bound needs a full-dimensional polyhedron")
    alpha = vector(alpha)
    delta = delta_I(A, alpha, IndexSet(), settings)
    if delta == 0:
        raise DegenerateObjectiveError("Delta(A, alpha) = 0")
    kappa = lp_max(norm.polyhedron, alpha, settings)[0] / delta
    volume = volume_low_dim(alpha_section(A, alpha), settings)
    lhs = kappa * kappa * volume.squared * delta * delta
    rhs = Integer(4) ** (n - 1) * norm2_squared(alpha)
    check = VolumeBoundCheck(kappa, volume.squared, delta, lhs, rhs)
    if not check.holds:
        logger.warning(f"Volume bound fails for alpha={alpha}: {lhs} >= {rhs}")
    return check


@dataclass(frozen=True)
class PlanarSection:
    """The planar polygon Q attached to P_alpha when n = 3."""

    B: ExactMatrix
    reduced_rows: ExactMatrix
    area_squared: Rational
    section_area_squared: Rational
    scaling_holds: bool
    rotation_contained: bool
    mahler_product: Rational

    @property
    def holds(self) -> bool:
        return bool(self.scaling_holds and self.rotation_contained and self.area_squared >= 8 and self.mahler_product >= 8)


def planar_section(norm: NormalizedInstance, alpha: Sequence[object], settings: Optional[Settings] = None) -> PlanarSection:
    """Map P_alpha to the plane through B = (alpha; A_I) with |det B| = Delta."""
    A = norm.base.A
    if A.cols != 3:
        raise DimensionError("planar_section needs n = 3")
    alpha = vector(alpha)
    best, best_rows = ZERO, None
    for rows in combinations(range(A.rows), 2):
        value = abs(det(A.select_rows(rows).with_row_first(alpha)))
        if value > best:
            best, best_rows = value, rows
    if best_rows is None:
        raise DegenerateObjectiveError("Delta(A, alpha) = 0")
    B = A.select_rows(best_rows).with_row_first(alpha)
    reduced = (A @ B.inverse()).submatrix(range(A.rows), [1, 2])
    Q = symmetric_polygon(reduced.row_list())
    area = area_2d(Q, settings)
    section = volume_low_dim(alpha_section(A, alpha), settings)
    scaling = area * area * norm2_squared(alpha) == det(B) ** 2 * section.squared

    rotated = [(-r[1], r[0]) for r in reduced.row_list()]
    contained = all(abs(dot(a, t)) <= 1 for a in reduced.row_list() for t in rotated)
    polar = convex_hull_2d(list(reduced.row_list()) + [tuple(-x for x in r) for r in reduced.row_list()])
    product = area * polygon_area(polar)
    return PlanarSection(B, reduced, area * area, section.squared, scaling, contained, product)


# ---------------------------------------------------------------------------
# Strictly Delta-modular bound
# ---------------------------------------------------------------------------


def check_factorization(A: ExactMatrix, T: ExactMatrix, B: ExactMatrix, settings: Optional[Settings] = None) -> None:
    """Check A = T B with T totally unimodular and B square, integral, invertible.

    Raises:
        HypothesisError: naming the first hypothesis that fails
    """
    if not (B.is_square and B.is_integral):
        raise HypothesisError("B square integral", f"B has shape {B.shape}")
    if det(B) == 0:
        raise HypothesisError("B invertible", "det B = 0")
    if T.cols != B.rows or T @ B != A:
        raise HypothesisError("A = T B", "the product T B differs from A")
    if not is_totally_unimodular(T, settings):
        raise HypothesisError("T totally unimodular", "a square minor of T lies outside {-1, 0, 1}")


def _check_decomposition(A: ExactMatrix, T: ExactMatrix, B: ExactMatrix, delta_n: Rational, settings: Optional[Settings]) -> None:
    check_factorization(A, T, B, settings)
    if abs(det(B)) != delta_n:
        raise HypothesisError("|det B| = Delta_n(A)", f"|det B| = {abs(det(B))}, Delta_n = {delta_n}")


def check_strictly_delta_modular_bound(
    inst: Instance, T: ExactMatrix, B: ExactMatrix, settings: Optional[Settings] = None
) -> bool:
    """Proximity <= max{Delta_(n-1), Delta_n} - 1 for A = T B.

    Raises:
        HypothesisError: a decomposition hypothesis fails (named)
    """
    report = measure_proximity(inst, witness=(T, B), settings=settings)
    holds = report.flags["tu"].holds
    logger.info(f"Strictly Delta-modular bound {report.bound_tu}: proximity {report.proximity} holds={holds}")
    return holds
