"""
Spindle - cones, spindles and the walks that cross them.

The cone C(A, x*) keeps the sign pattern of A x*; the spindle S(A, x*) is
C(A, x*) intersected with x* - C(A, x*). The basis path runs an exact
simplex from 0 to the apex and stops half way in the sense of tight apex
constraints; the template walk chains such stops down to the origin; the
ray decomposition writes a lattice apex as a chain of primitive rays.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Rational, floor

from ..core.config import Settings, get_settings
from ..core.exceptions import (
    CertificationError,
    DegenerateObjectiveError,
    HypothesisError,
    ParameterError,
    WalkStalledError,
)
from ..core.logger import setup_logger
from .exactmath import (
    ZERO,
    ExactMatrix,
    IndexSet,
    Vector,
    add,
    det,
    dot,
    gcd_of,
    independent_rows,
    inf_norm,
    is_integral_vector,
    is_zero_vector,
    max_abs_minor,
    scale,
    sub,
    unit_vector,
    vector,
)
from .polyhedron import (
    HPolyhedron,
    dimension,
    enumerate_vertices,
    face_dimension,
    implicit_equalities,
    lp_max,
    recession_rays,
)
from .proximity import NormalizedInstance, check_factorization, default_block_sequence, delta_I, lt_rational_plus_sqrt2

logger = setup_logger(__name__)


def _sign(value: Rational) -> int:
    return 1 if value > 0 else (-1 if value < 0 else 0)


@dataclass(frozen=True)
class SpindleRep:
    """S(A, x*) as a tagged inequality system.

    System rows ``0..p-1`` are the copies tight at 0 (-â_i x <= 0), rows
    ``p..2p-1`` the copies tight at the apex (â_i x <= â_i x*), and the
    remaining rows are the equalities a_i x = 0 for rows with a_i x* = 0.
    """

    apex: Vector
    sign_vector: Tuple[int, ...]
    system: HPolyhedron
    support: Tuple[int, ...] = ()
    null_rows: Tuple[int, ...] = ()

    @property
    def zero_copy(self) -> IndexSet:
        return IndexSet(tuple(range(len(self.support))))

    @property
    def apex_copy(self) -> IndexSet:
        p = len(self.support)
        return IndexSet(tuple(range(p, 2 * p)))

    def source_row(self, index: int) -> int:
        """Row of A that a system row was built from."""
        p = len(self.support)
        if index < 2 * p:
            return self.support[index % p]
        return self.null_rows[index - 2 * p]

    @property
    def dimension(self) -> int:
        return dimension(self.system)

    def contains(self, x: Sequence[object]) -> bool:
        return self.system.contains(x)

    def mirror(self, x: Sequence[object]) -> Vector:
        return sub(self.apex, vector(x))

    def vertices(self, settings: Optional[Settings] = None) -> List[Vector]:
        return [v.point for v in enumerate_vertices(self.system, settings)]

    def is_centrally_symmetric(self, settings: Optional[Settings] = None) -> bool:
        points = set(self.vertices(settings))
        return all(self.mirror(v) in points for v in points)

    def contains_spindle(self, other: "SpindleRep", settings: Optional[Settings] = None) -> bool:
        return all(self.contains(v) for v in other.vertices(settings))


@dataclass(frozen=True)
class SpindleFace:
    """Face of a spindle given by the system rows made tight."""

    rows: IndexSet
    dimension: int

    def contains(self, S: SpindleRep, x: Sequence[object]) -> bool:
        if not S.contains(x):
            return False
        slack = S.system.slack(x)
        return all(slack[i] == 0 for i in self.rows)


@dataclass(frozen=True)
class FacePath:
    """Stopping point of the basis path and its two faces."""

    vertex: Vector
    F: SpindleFace
    G: SpindleFace
    basis: IndexSet


@dataclass
class WalkStep:
    start: Vector
    end: Vector
    block: int
    spindle_dimension: int
    F: SpindleFace
    G: Optional[SpindleFace]
    slice_rows: IndexSet
    slice_dimension: int
    step_value: Rational
    slice_max: Rational
    delta: Rational
    kappa: Rational


@dataclass
class WalkTrace:
    """Points x*_0 = x*, ..., x*_t = 0 with per-step faces and slice bounds."""

    alpha: Vector
    d_seq: Tuple[int, ...]
    base_rows: IndexSet
    base_delta: Rational
    steps: List[WalkStep] = field(default_factory=list)

    @property
    def points(self) -> List[Vector]:
        return [self.steps[0].start] + [s.end for s in self.steps] if self.steps else []

    @property
    def faces(self) -> List[Tuple[SpindleFace, Optional[SpindleFace]]]:
        return [(s.F, s.G) for s in self.steps]

    @property
    def index_sets(self) -> List[IndexSet]:
        return [s.slice_rows for s in self.steps]

    @property
    def bound_terms(self) -> List[Rational]:
        return [s.slice_max for s in self.steps]

    @property
    def total(self) -> Rational:
        return sum((s.step_value for s in self.steps), ZERO)

    @property
    def total_bound(self) -> Rational:
        return sum(self.bound_terms, ZERO)

    @property
    def kappa_bound(self) -> Rational:
        """Delta_I times the sum of the kappa values of the visited slices."""
        return self.base_delta * sum((s.kappa for s in self.steps), ZERO)

    def template_bound_holds(self) -> Optional[bool]:
        """alpha^T x* < Delta_I * sum of the per-block constants 1, 1, sqrt(2)."""
        if any(d > 3 for d in self.d_seq):
            return None
        threes = sum(1 for d in self.d_seq if d == 3)
        rest = len(self.d_seq) - threes
        return lt_rational_plus_sqrt2(self.total, self.base_delta * rest, self.base_delta * threes)


# ---------------------------------------------------------------------------
# Cones and spindles
# ---------------------------------------------------------------------------


def build_cone(A: ExactMatrix, x_star: Sequence[object]) -> HPolyhedron:
    """C(A, x*) = {x : sign(a_i x*) a_i x >= 0, a_i x = 0 where a_i x* = 0}."""
    x_star = vector(x_star)
    rows, eq = [], []
    for i, a in enumerate(A.row_list()):
        s = _sign(dot(a, x_star))
        if s == 0:
            eq.append(len(rows))
            rows.append(a)
        else:
            rows.append(tuple(-s * x for x in a))
    return HPolyhedron(ExactMatrix(rows, cols=A.cols), tuple(ZERO for _ in rows), IndexSet(tuple(eq)))


def build_spindle(
    A: ExactMatrix,
    x_star: Sequence[object],
    b: Optional[Sequence[object]] = None,
    settings: Optional[Settings] = None,
) -> SpindleRep:
    """The spindle S(A, x*) as a tagged system.

    Args:
        A: Constraint matrix
        x_star: Apex
        b: Optional right-hand side; when x* lies in P(A, b), S ⊆ P(A, b)
            is verified on the vertices of S
    """
    x_star = vector(x_star)
    signs = tuple(_sign(dot(a, x_star)) for a in A.row_list())
    support = tuple(i for i, s in enumerate(signs) if s != 0)
    null_rows = tuple(i for i, s in enumerate(signs) if s == 0)
    hats = [scale(signs[i], A.row(i)) for i in support]

    rows = [tuple(-x for x in h) for h in hats] + hats + [A.row(i) for i in null_rows]
    rhs = [ZERO] * len(hats) + [dot(h, x_star) for h in hats] + [ZERO] * len(null_rows)
    eq = IndexSet(tuple(range(2 * len(hats), len(rows))))
    system = HPolyhedron(ExactMatrix(rows, cols=A.cols), tuple(rhs), eq)
    spindle = SpindleRep(x_star, signs, system, support, null_rows)

    if b is not None:
        P = HPolyhedron(A, vector(b))
        if P.contains(x_star):
            outside = [v for v in spindle.vertices(settings) if not P.contains(v)]
            if outside:
                raise CertificationError("S(A, x*) ⊆ P(A, b)", f"vertex {outside[0]} lies outside P")
    return spindle


def cone_rays(A: ExactMatrix, x_star: Sequence[object], B: Optional[ExactMatrix] = None, settings: Optional[Settings] = None) -> List[Vector]:
    """Extreme rays of C(A, x*).

    Rays are primitive integer vectors; with B they are rescaled to the
    primitive representatives of the lattice B^-1 Z^n.
    """
    rays = recession_rays(build_cone(A, x_star), settings)
    if B is None:
        return rays
    return [scale(Rational(1, gcd_of(B.apply(r))), r) for r in rays]


def ray_norm_bound(A: ExactMatrix, B: ExactMatrix, settings: Optional[Settings] = None) -> Rational:
    """Delta_(n-1)(A) / |det B|, the infinity-norm bound on primitive cone rays."""
    n = A.cols
    top = max_abs_minor(A, n - 1, settings) if n > 1 else Rational(1)
    return top / abs(det(B))


# ---------------------------------------------------------------------------
# Basis path
# ---------------------------------------------------------------------------


def face_path(S: SpindleRep, d: int, settings: Optional[Settings] = None) -> FacePath:
    """Pivot from 0 towards the apex until exactly k - d apex rows are basic.

    Runs the exact basis simplex maximizing the sum of the apex-copy rows
    with Bland's rule. Every pivot swaps one row of the zero/apex copies,
    so the count of basic apex rows moves by at most one.

    Raises:
        ParameterError: d outside [1, dim S]
        WalkStalledError: no pivot makes progress
    """
    settings = settings or get_settings()
    k = S.dimension
    if not 1 <= d <= k:
        raise ParameterError(f"face_path needs 1 <= d <= {k}, got {d}")
    system = S.system
    M_all = system.A
    core = independent_rows(M_all, system.equality_rows)
    basis = core + independent_rows(M_all, S.zero_copy, start=core)
    if len(basis) != system.n:
        raise WalkStalledError(f"No starting basis at 0 (found {len(basis)} of {system.n} rows)")

    apex_rows = set(S.apex_copy)
    objective = [ZERO] * system.n
    for i in apex_rows:
        objective = add(objective, M_all.row(i))
    target = k - d

    for _ in range(settings.cap_subsets):
        if sum(1 for i in basis if i in apex_rows) == target:
            break
        block = M_all.select_rows(basis)
        point = block.solve([system.b[i] for i in basis])
        duals = block.transpose().solve(objective)
        leaving = [p for p, i in enumerate(basis) if i not in core and duals[p] < 0]
        if not leaving:
            raise WalkStalledError(f"Optimal basis reached with the apex count off target {target}")
        p = min(leaving, key=lambda q: basis[q])
        direction = block.solve(unit_vector(system.n, p, -1))
        slack = system.slack(point)
        best, entering = None, None
        for r in range(system.m):
            if r in basis or r in system.equality_rows:
                continue
            rate = dot(M_all.row(r), direction)
            if rate <= 0:
                continue
            ratio = slack[r] / rate
            if best is None or ratio < best:
                best, entering = ratio, r
        if entering is None:
            raise WalkStalledError("Spindle direction has no blocking row")
        basis[p] = entering
    else:
        raise WalkStalledError(f"Basis path exceeded {settings.cap_subsets} pivots")

    vertex = M_all.select_rows(basis).solve([system.b[i] for i in basis])
    F_rows = IndexSet(tuple(sorted(i for i in basis if i in apex_rows)))
    G_rows = IndexSet(tuple(sorted(i for i in basis if i in S.zero_copy)))
    result = FacePath(
        vertex=vertex,
        F=SpindleFace(F_rows, face_dimension(system, F_rows, settings)),
        G=SpindleFace(G_rows, face_dimension(system, G_rows, settings)),
        basis=IndexSet.of(basis),
    )
    logger.debug(f"Basis path stopped at {vertex} (dim F={result.F.dimension}, dim G={result.G.dimension})")
    return result


def _common_face(S: SpindleRep, u: Sequence[object], v: Sequence[object], settings: Optional[Settings]) -> SpindleFace:
    """Smallest face of S containing both u and v."""
    rows = IndexSet(tuple(i for i in S.system.tight_rows(u) if i in S.system.tight_rows(v)))
    return SpindleFace(rows, face_dimension(S.system, rows, settings))


def face_path_candidates(S: SpindleRep, d: int, settings: Optional[Settings] = None) -> List[Vector]:
    """Every vertex lying on a d-face with the apex and a (k-d)-face with 0."""
    k = S.dimension
    if not 1 <= d <= k:
        raise ParameterError(f"face_path_candidates needs 1 <= d <= {k}, got {d}")
    origin = tuple(ZERO for _ in S.apex)
    found = []
    for v in S.vertices(settings):
        if _common_face(S, v, S.apex, settings).dimension > d:
            continue
        if _common_face(S, v, origin, settings).dimension > k - d:
            continue
        found.append(v)
    return found


# ---------------------------------------------------------------------------
# Template walk
# ---------------------------------------------------------------------------


def template_walk(
    norm: NormalizedInstance,
    alpha: Sequence[object],
    d_seq: Optional[Sequence[int]] = None,
    settings: Optional[Settings] = None,
) -> WalkTrace:
    """Walk from the alpha-maximizer of P down to 0 through spindle faces.

    Each step moves to the alpha-best vertex offered by the basis path
    condition for the current block; the last step drops straight to 0.
    Every step value is bounded by the exact maximum of alpha over the
    slice P_{I_i} whose kernel spans the step's face.

    Raises:
        ParameterError: d_seq does not sum to dim P
        WalkStalledError: a step fails to shrink the spindle
        CertificationError: a step exceeds its slice bound
    """
    settings = settings or get_settings()
    P = norm.polyhedron
    A = norm.base.A
    alpha = vector(alpha)
    dim_P = dimension(P, settings)
    blocks = tuple(d_seq) if d_seq is not None else default_block_sequence(dim_P)
    if any(d < 1 for d in blocks) or sum(blocks) != dim_P:
        raise ParameterError(f"Block sequence {blocks} must be positive and sum to dim P = {dim_P}")

    base = IndexSet.of(independent_rows(A, implicit_equalities(P, settings)))
    base_delta = delta_I(A, alpha, base, settings)
    if base_delta == 0:
        raise DegenerateObjectiveError(f"Delta_I(A, alpha) = 0 for I={base.members}")

    _, top = lp_max(P, alpha, settings)
    trace = WalkTrace(alpha=alpha, d_seq=blocks, base_rows=base, base_delta=base_delta)
    origin = tuple(ZERO for _ in alpha)
    current = top.point
    S_i = build_spindle(A, current)

    for i, d_i in enumerate(blocks):
        k_i = S_i.dimension
        if d_i < k_i:
            candidates = face_path_candidates(S_i, d_i, settings)
            if not candidates:
                raise WalkStalledError(f"No basis path vertex for block {d_i} at step {i}")
            nxt = min(candidates, key=lambda v: (-dot(alpha, v), v))
            F = _common_face(S_i, nxt, current, settings)
            G: Optional[SpindleFace] = _common_face(S_i, nxt, origin, settings)
        else:
            nxt = origin
            F = SpindleFace(IndexSet(), k_i)
            G = None

        step = sub(current, nxt)
        if is_zero_vector(step):
            raise WalkStalledError(f"Step {i} does not move")
        vanishing = [j for j in range(A.rows) if dot(A.row(j), step) == 0]
        rows = base.union(independent_rows(A, vanishing, start=base))
        sliced = P.slice(rows)
        slice_max = lp_max(sliced, alpha, settings)[0]
        delta = delta_I(A, alpha, rows, settings)
        trace.steps.append(
            WalkStep(
                start=current,
                end=nxt,
                block=d_i,
                spindle_dimension=k_i,
                F=F,
                G=G,
                slice_rows=rows,
                slice_dimension=dimension(sliced, settings),
                step_value=dot(alpha, step),
                slice_max=slice_max,
                delta=delta,
                kappa=slice_max / delta if delta else ZERO,
            )
        )
        if nxt == origin:
            break
        S_next = build_spindle(A, nxt)
        if not S_i.contains_spindle(S_next, settings):
            raise CertificationError("nested spindles", f"S({nxt}) is not inside S({current})")
        if S_next.dimension > k_i - d_i:
            raise WalkStalledError(f"Spindle dimension {S_next.dimension} after step {i} exceeds {k_i - d_i}")
        current, S_i = nxt, S_next
    else:
        raise WalkStalledError(f"Block sequence {blocks} exhausted before reaching 0")

    certify_walk(trace, top.point)
    logger.info(f"Template walk with blocks {blocks}: {len(trace.steps)} steps, total {trace.total}")
    return trace


def certify_walk(trace: WalkTrace, top: Sequence[object]) -> None:
    """Re-check a finished walk against its block sequence.

    Raises:
        CertificationError: naming the first relation that fails
    """
    k, t = len(trace.d_seq), len(trace.steps)
    if not 1 <= t <= k:
        raise CertificationError("steps <= blocks", f"{t} steps for {k} blocks")
    top = vector(top)
    if trace.total != dot(trace.alpha, top):
        raise CertificationError("telescoping sum", f"{trace.total} != {dot(trace.alpha, top)}")
    for i, step in enumerate(trace.steps):
        if step.block != trace.d_seq[i]:
            raise CertificationError("block order", f"step {i} uses block {step.block}, expected {trace.d_seq[i]}")
        if step.slice_dimension > step.block:
            raise CertificationError("slice dimension <= block", f"step {i}: {step.slice_dimension} > {step.block}")
        if step.step_value > step.slice_max:
            raise CertificationError("slice bound", f"step {i}: {step.step_value} > {step.slice_max}")
    last = trace.steps[-1]
    if last.block < last.spindle_dimension:
        raise CertificationError("final block covers the last spindle", f"{last.block} < {last.spindle_dimension}")


# ---------------------------------------------------------------------------
# Primitive ray decomposition
# ---------------------------------------------------------------------------


@dataclass
class RayDecomposition:
    """x* as a non-negative integral combination of primitive lattice rays."""

    apex: Vector
    rays: List[Vector]
    multiplicities: List[int]
    chain: List[Vector]
    lattice_index: int
    norm_bound: Rational
    partial_sums_in_spindle: bool
    points_distinct: bool
    residues_distinct: bool
    cone_rays: List[Vector] = field(default_factory=list)

    @property
    def terms(self) -> List[Tuple[Vector, int]]:
        return list(zip(self.rays, self.multiplicities))

    @property
    def length(self) -> int:
        return sum(self.multiplicities)

    @property
    def max_ray_norm(self) -> Rational:
        return max((inf_norm(r) for r in self.rays), default=ZERO)

    @property
    def norms_within_bound(self) -> bool:
        return bool(self.max_ray_norm <= self.norm_bound)

    @property
    def cone_rays_within_bound(self) -> bool:
        """Every extreme ray of C(x*), primitive in B^-1 Z^n, within the norm bound."""
        return all(inf_norm(r) <= self.norm_bound for r in self.cone_rays)


def _residue(x: Vector) -> Vector:
    return tuple(v - floor(v) for v in x)


def ray_decomposition(
    A: ExactMatrix,
    T: ExactMatrix,
    B: ExactMatrix,
    x_star: Sequence[object],
    settings: Optional[Settings] = None,
) -> RayDecomposition:
    """Split x* in B^-1 Z^n into primitive rays of C(x*).

    Peels off a vertex of S(x*) adjacent to 0 and repeats on the remainder;
    a one-dimensional spindle is an integer multiple of its primitive ray.

    Raises:
        HypothesisError: A != T B, T not totally unimodular, B singular,
            or x* outside B^-1 Z^n
    """
    settings = settings or get_settings()
    check_factorization(A, T, B, settings)
    x_star = vector(x_star)
    if not is_integral_vector(B.apply(x_star)):
        raise HypothesisError("x* ∈ B^-1 Z^n", f"B x* = {B.apply(x_star)}")

    origin = tuple(ZERO for _ in x_star)
    totals: Dict[Vector, int] = {}
    order: List[Vector] = []
    pieces: List[Tuple[Vector, int]] = []
    current = x_star
    while not is_zero_vector(current):
        S = build_spindle(A, current)
        if S.dimension == 1:
            piece = current
        else:
            adjacent = [v for v in S.vertices(settings) if v != origin and _common_face(S, v, origin, settings).dimension == 1]
            if not adjacent:
                raise HypothesisError("vertex adjacent to 0", f"spindle at {current} has none")
            piece = adjacent[0]
        g = gcd_of(B.apply(piece))
        ray = scale(Rational(1, g), piece)
        if ray not in totals:
            order.append(ray)
            totals[ray] = 0
        totals[ray] += g
        pieces.append((ray, g))
        current = sub(current, piece)

    chain = [origin]
    for ray, count in pieces:
        for _ in range(count):
            chain.append(add(chain[-1], ray))
    outer = build_spindle(A, x_star)
    residues = [_residue(p) for p in chain]
    result = RayDecomposition(
        apex=x_star,
        rays=order,
        multiplicities=[totals[r] for r in order],
        chain=chain,
        lattice_index=int(abs(det(B))),
        norm_bound=ray_norm_bound(A, B, settings),
        partial_sums_in_spindle=all(outer.contains(p) for p in chain),
        points_distinct=len(set(chain)) == len(chain),
        residues_distinct=len(set(residues)) == len(residues),
        cone_rays=cone_rays(A, x_star, B, settings),
    )
    logger.info(f"Decomposed {x_star} into {result.length} primitive steps over {len(order)} rays")
    return result
