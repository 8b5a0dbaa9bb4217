"""
Polyhedron - exact H-polyhedron operations.

Vertices come from exhaustive basis enumeration, so each one carries the
basis that certifies it. Everything downstream (LP, dimension, faces,
volumes) is derived from the vertex/ray description.
"""

from dataclasses import dataclass, field
from functools import cmp_to_key, lru_cache
from itertools import combinations, product
from math import comb, lcm, prod
from typing import Iterable, List, Optional, Sequence, Tuple

from sympy import Expr, Rational, sqrt

from ..core.config import Settings, get_settings
from ..core.exceptions import (
    DimensionError,
    HypothesisError,
    InfeasibleError,
    NoVertexError,
    ParameterError,
    ResourceCapError,
    UnboundedError,
)
from ..core.logger import setup_logger
from .exactmath import (
    ONE,
    ZERO,
    ExactMatrix,
    IndexSet,
    Vector,
    det,
    dot,
    gcd_of,
    independent_rows,
    norm2_squared,
    sub,
    to_scalar,
    vector,
)

logger = setup_logger(__name__)

LatticePoint = Tuple[int, ...]
Box = Sequence[Tuple[int, int]]


@dataclass(frozen=True)
class HPolyhedron:
    """{x : A x <= b} with the rows in ``equality_rows`` forced to equality."""

    A: ExactMatrix
    b: Vector
    equality_rows: IndexSet = field(default_factory=IndexSet)

    def __post_init__(self) -> None:
        object.__setattr__(self, "b", vector(self.b))
        if len(self.b) != self.A.rows:
            raise DimensionError(f"A has {self.A.rows} rows but b has length {len(self.b)}")
        self.equality_rows.check_range(self.A.rows)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[object]], rhs: Sequence[object], equality_rows: Iterable[int] = ()) -> "HPolyhedron":
        A = ExactMatrix(rows)
        return cls(A, vector(rhs), IndexSet.of(equality_rows, A.rows))

    @classmethod
    def box(cls, lower: Sequence[object], upper: Sequence[object]) -> "HPolyhedron":
        """The axis-parallel box lower <= x <= upper."""
        n = len(lower)
        rows: List[List[int]] = []
        rhs: List[object] = []
        for i in range(n):
            rows.append([1 if j == i else 0 for j in range(n)])
            rhs.append(upper[i])
            rows.append([-1 if j == i else 0 for j in range(n)])
            rhs.append(-to_scalar(lower[i]))
        return cls.from_rows(rows, rhs)

    @property
    def m(self) -> int:
        return self.A.rows

    @property
    def n(self) -> int:
        return self.A.cols

    # -- membership -------------------------------------------------------

    def slack(self, x: Sequence[object]) -> Vector:
        x = vector(x)
        return tuple(self.b[i] - dot(self.A.row(i), x) for i in range(self.m))

    def contains(self, x: Sequence[object]) -> bool:
        s = self.slack(x)
        if any(v < 0 for v in s):
            return False
        return all(s[i] == 0 for i in self.equality_rows)

    def tight_rows(self, x: Sequence[object]) -> IndexSet:
        s = self.slack(x)
        return IndexSet(tuple(i for i in range(self.m) if s[i] == 0))

    # -- derived systems --------------------------------------------------

    def slice(self, rows: Iterable[int]) -> "HPolyhedron":
        """P intersected with ker A_rows (the right-hand side of those rows becomes 0)."""
        rows = IndexSet.of(rows, self.m)
        b = tuple(ZERO if i in rows else self.b[i] for i in range(self.m))
        return HPolyhedron(self.A, b, self.equality_rows.union(rows))


@dataclass(frozen=True)
class VertexCertificate:
    """A vertex together with n linearly independent rows tight at it."""

    point: Vector
    basis: IndexSet

    def verify(self, P: HPolyhedron) -> bool:
        if len(self.basis) != P.n:
            return False
        block = P.A.select_rows(self.basis)
        if det(block) == 0:
            return False
        if block.apply(self.point) != tuple(P.b[i] for i in self.basis):
            return False
        return P.contains(self.point)


@dataclass(frozen=True)
class LowDimVolume:
    """Exact measure of a polytope of dimension at most 2.

    ``squared`` is always rational; ``measure`` is its exact square root.
    """

    dimension: int
    squared: Rational
    endpoints: Optional[Tuple[Vector, Vector]] = None
    cycle: Tuple[Vector, ...] = ()

    @property
    def measure(self) -> Expr:
        return sqrt(self.squared)


# ---------------------------------------------------------------------------
# Vertices and rays
# ---------------------------------------------------------------------------


def _budget(count: int, what: str, settings: Optional[Settings]) -> None:
    cap = (settings or get_settings()).cap_subsets
    if count > cap:
        raise ResourceCapError(f"{what} would visit {count} subsets (cap {cap})")


def _equality_core(P: HPolyhedron) -> List[int]:
    return independent_rows(P.A, P.equality_rows)


def primitive_direction(d: Sequence[Rational]) -> Vector:
    """Scale a nonzero rational vector to a primitive integer vector."""
    d = vector(d)
    scale = 1
    for x in d:
        scale = lcm(scale, int(x.q))
    ints = [int(x * scale) for x in d]
    g = gcd_of(ints)
    return vector(v // g for v in ints)


@lru_cache(maxsize=1024)
def _vertices(P: HPolyhedron) -> Tuple[VertexCertificate, ...]:
    if P.A.rank() < P.n:
        raise NoVertexError(f"Polyhedron in R^{P.n} is not pointed (rank {P.A.rank()})")
    core = _equality_core(P)
    free = [i for i in range(P.m) if i not in core]
    need = P.n - len(core)
    found = {}
    for extra in combinations(free, need):
        basis = IndexSet.of(core + list(extra))
        block = P.A.select_rows(basis)
        if det(block) == 0:
            continue
        point = block.solve([P.b[i] for i in basis])
        if point in found or not P.contains(point):
            continue
        found[point] = VertexCertificate(point, basis)
    return tuple(found[p] for p in sorted(found))


def enumerate_vertices(P: HPolyhedron, settings: Optional[Settings] = None) -> List[VertexCertificate]:
    """All vertices with witnessing bases, sorted lexicographically.

    Raises:
        NoVertexError: P is not pointed
        InfeasibleError: P is empty
    """
    core_size = min(len(P.equality_rows), P.n)
    _budget(comb(P.m, max(P.n - core_size, 0)), "enumerate_vertices", settings)
    vertices = list(_vertices(P))
    if not vertices:
        raise InfeasibleError(f"Polyhedron with {P.m} rows in R^{P.n} is empty")
    logger.debug(f"Enumerated {len(vertices)} vertices of a {P.m}x{P.n} system")
    return vertices


@lru_cache(maxsize=1024)
def _rays(P: HPolyhedron) -> Tuple[Vector, ...]:
    core = _equality_core(P)
    free = [i for i in range(P.m) if i not in core]
    need = P.n - 1 - len(core)
    if need < 0:
        return ()
    found = set()
    for extra in combinations(free, need):
        rows = core + list(extra)
        block = P.A.select_rows(rows)
        kernel = block.nullspace()
        if len(kernel) != 1:
            continue
        for sign in (1, -1):
            d = tuple(sign * x for x in kernel[0])
            products = P.A.apply(d)
            if any(v > 0 for v in products):
                continue
            if any(products[i] != 0 for i in P.equality_rows):
                continue
            found.add(primitive_direction(d))
    return tuple(sorted(found))


def recession_rays(P: HPolyhedron, settings: Optional[Settings] = None) -> List[Vector]:
    """Extreme rays of the recession cone of a pointed P (primitive integer)."""
    if P.A.rank() < P.n:
        raise NoVertexError("Recession rays need a pointed polyhedron")
    _budget(comb(P.m, max(P.n - 1, 0)), "recession_rays", settings)
    return list(_rays(P))


def is_bounded(P: HPolyhedron, settings: Optional[Settings] = None) -> bool:
    return not recession_rays(P, settings)


# ---------------------------------------------------------------------------
# Linear programming
# ---------------------------------------------------------------------------


def optimal_vertices(
    P: HPolyhedron, objective: Sequence[object], settings: Optional[Settings] = None
) -> Tuple[Rational, List[VertexCertificate]]:
    """Optimal value and every optimal vertex (lexicographic order)."""
    c = vector(objective)
    if len(c) != P.n:
        raise DimensionError(f"Objective has length {len(c)}, expected {P.n}")
    vertices = enumerate_vertices(P, settings)
    for ray in recession_rays(P, settings):
        if dot(c, ray) > 0:
            raise UnboundedError(f"Objective {c} is unbounded along ray {ray}")
    value = max(dot(c, v.point) for v in vertices)
    return value, [v for v in vertices if dot(c, v.point) == value]


def lp_max(
    P: HPolyhedron, objective: Sequence[object], settings: Optional[Settings] = None
) -> Tuple[Rational, VertexCertificate]:
    """max c^T x over P, with the lexicographically smallest optimal vertex.

    Raises:
        InfeasibleError: P is empty
        UnboundedError: the objective is unbounded on P
    """
    value, winners = optimal_vertices(P, objective, settings)
    return value, winners[0]


def dual_feasible_basis(
    P: HPolyhedron, objective: Sequence[object], vertex: VertexCertificate, settings: Optional[Settings] = None
) -> IndexSet:
    """A basis B at an optimal vertex with c = y^T A_B and y >= 0.

    The vertex's own basis is tried first, then every n-subset of its tight
    rows. Multipliers of equality rows may have either sign.

    Raises:
        HypothesisError: no tight basis carries c (the vertex is not optimal)
    """
    c = vector(objective)
    tight = list(P.tight_rows(vertex.point))
    _budget(comb(len(tight), P.n), "dual_feasible_basis", settings)
    candidates = [vertex.basis] + [IndexSet(rows) for rows in combinations(tight, P.n)]
    for basis in candidates:
        block = P.A.select_rows(basis)
        if det(block) == 0:
            continue
        y = block.transpose().solve(c)
        if all(v >= 0 for i, v in zip(basis, y) if i not in P.equality_rows):
            return basis
    raise HypothesisError("dual-feasible basis", f"none among the rows tight at {vertex.point}")


# ---------------------------------------------------------------------------
# Lattice points
# ---------------------------------------------------------------------------


def bounding_box(P: HPolyhedron, settings: Optional[Settings] = None) -> List[Tuple[int, int]]:
    """Vertex coordinate extremes rounded outward (P must be bounded)."""
    if not is_bounded(P, settings):
        raise UnboundedError("Bounding box of an unbounded polyhedron")
    vertices = enumerate_vertices(P, settings)
    box = []
    for j in range(P.n):
        coords = [v.point[j] for v in vertices]
        lo, hi = min(coords), max(coords)
        box.append((int(lo.p) // int(lo.q), -((-int(hi.p)) // int(hi.q))))
    return box


def lattice_points(
    P: HPolyhedron, box: Optional[Box] = None, settings: Optional[Settings] = None
) -> List[LatticePoint]:
    """All integral points of P inside ``box`` (exhaustive scan).

    The box defaults to ``bounding_box(P)``.

    Raises:
        ResourceCapError: the box holds more points than ``cap_box``
    """
    settings = settings or get_settings()
    if box is None:
        try:
            box = bounding_box(P, settings)
        except InfeasibleError:
            return []
    if len(box) != P.n:
        raise DimensionError(f"Box has {len(box)} coordinates, expected {P.n}")
    sizes = [max(hi - lo + 1, 0) for lo, hi in box]
    volume = prod(sizes)
    if volume > settings.cap_box:
        raise ResourceCapError(f"Lattice scan of {volume} points exceeds cap {settings.cap_box}")

    rows = P.A.to_int_lists()
    eq = set(P.equality_rows)
    # integral A: a.z <= b  iff  a.z <= floor(b); equalities need integral b
    limits = []
    for i, value in enumerate(P.b):
        if i in eq and value.q != 1:
            return []
        limits.append(int(value.p) // int(value.q))

    points = []
    for z in product(*(range(lo, hi + 1) for lo, hi in box)):
        ok = True
        for i, row in enumerate(rows):
            s = sum(a * x for a, x in zip(row, z))
            if s > limits[i] or (i in eq and s != limits[i]):
                ok = False
                break
        if ok:
            points.append(tuple(z))
    logger.debug(f"Lattice scan of {volume} box points found {len(points)}")
    return points


# ---------------------------------------------------------------------------
# Dimension and faces
# ---------------------------------------------------------------------------


def implicit_equalities(P: HPolyhedron, settings: Optional[Settings] = None) -> IndexSet:
    """Rows satisfied with equality on all of P (equality rows included)."""
    vertices = enumerate_vertices(P, settings)
    rays = recession_rays(P, settings)
    rows = []
    for i in range(P.m):
        a = P.A.row(i)
        if all(dot(a, v.point) == P.b[i] for v in vertices) and all(dot(a, r) == 0 for r in rays):
            rows.append(i)
    return IndexSet(tuple(rows))


def dimension(P: HPolyhedron, settings: Optional[Settings] = None) -> int:
    """Affine dimension: n - rank of the implicit-equality rows.

    Raises:
        InfeasibleError: P is empty
    """
    implicit = implicit_equalities(P, settings)
    if not implicit:
        return P.n
    return P.n - P.A.select_rows(implicit).rank()


def face_dimension(P: HPolyhedron, rows: Iterable[int], settings: Optional[Settings] = None) -> int:
    """Dimension of the face where ``rows`` are tight (-1 if empty)."""
    rows = list(rows)
    vertices = [v.point for v in enumerate_vertices(P, settings) if all(dot(P.A.row(i), v.point) == P.b[i] for i in rows)]
    if not vertices:
        return -1
    rays = [r for r in recession_rays(P, settings) if all(dot(P.A.row(i), r) == 0 for i in rows)]
    spans = [sub(v, vertices[0]) for v in vertices[1:]] + list(rays)
    if not spans:
        return 0
    return ExactMatrix(spans).rank()


def shares_facet(P: HPolyhedron, u: Sequence[object], v: Sequence[object], settings: Optional[Settings] = None) -> bool:
    """True iff some facet-defining row is tight at both u and v."""
    u, v = vector(u), vector(v)
    for point in (u, v):
        if not P.contains(point):
            raise ParameterError(f"Point {point} is outside the polyhedron")
    if dimension(P, settings) != P.n:
        raise ParameterError("Facets are only reported for full-dimensional polyhedra")
    common = set(P.tight_rows(u)) & set(P.tight_rows(v))
    return any(face_dimension(P, [i], settings) == P.n - 1 for i in sorted(common))


# ---------------------------------------------------------------------------
# Planar geometry
# ---------------------------------------------------------------------------


def _cross(o: Sequence[Rational], a: Sequence[Rational], b: Sequence[Rational]) -> Rational:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points: Iterable[Sequence[object]]) -> List[Vector]:
    """Exact monotone-chain hull, counterclockwise, no collinear points."""
    pts = sorted(set(vector(p) for p in points))
    if len(pts) <= 2:
        return pts
    lower: List[Vector] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: List[Vector] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def polygon_area(cycle: Sequence[Sequence[Rational]]) -> Rational:
    """Shoelace area of a simple polygon given in cyclic order."""
    total = ZERO
    for i in range(len(cycle)):
        x0, y0 = cycle[i]
        x1, y1 = cycle[(i + 1) % len(cycle)]
        total += x0 * y1 - x1 * y0
    return abs(total) / 2


def _angular_order(points: List[Vector]) -> List[Vector]:
    cx = sum((p[0] for p in points), ZERO) / len(points)
    cy = sum((p[1] for p in points), ZERO) / len(points)

    def half(p: Vector) -> int:
        x, y = p[0] - cx, p[1] - cy
        return 0 if (y > 0 or (y == 0 and x > 0)) else 1

    def compare(p: Vector, q: Vector) -> int:
        hp, hq = half(p), half(q)
        if hp != hq:
            return hp - hq
        cross = (p[0] - cx) * (q[1] - cy) - (p[1] - cy) * (q[0] - cx)
        return -1 if cross > 0 else (1 if cross < 0 else 0)

    return sorted(points, key=cmp_to_key(compare))


def volume_low_dim(P: HPolyhedron, settings: Optional[Settings] = None) -> LowDimVolume:
    """Exact length (dim 1) or area (dim 2) of a polytope, reported squared.

    Raises:
        DimensionError: dim P > 2
        UnboundedError: P is unbounded
    """
    if not is_bounded(P, settings):
        raise UnboundedError("Volume of an unbounded polyhedron")
    d = dimension(P, settings)
    if d > 2:
        raise DimensionError(f"volume_low_dim handles dimension <= 2, got {d}")
    points = [v.point for v in enumerate_vertices(P, settings)]
    if d == 0:
        return LowDimVolume(0, ONE, cycle=(points[0],))
    if d == 1:
        first, last = points[0], points[-1]
        return LowDimVolume(1, norm2_squared(sub(last, first)), endpoints=(first, last))

    # plane through points[0] spanned by two independent edge directions
    origin = points[0]
    directions = [sub(p, origin) for p in points[1:]]
    u = directions[0]
    w = next(d_ for d_ in directions if ExactMatrix([u, d_]).rank() == 2)
    frame = ExactMatrix.from_columns([u, w])
    pair = next(
        (p, q)
        for p, q in combinations(range(P.n), 2)
        if det(frame.submatrix([p, q])) != 0
    )
    # parametrize the plane by the coordinates (x_p, x_q)
    M = frame @ frame.submatrix(list(pair)).inverse()
    gram = det(M.transpose() @ M)
    projected = [(pt[pair[0]], pt[pair[1]]) for pt in points]
    cycle = _angular_order([vector(p) for p in projected])
    area = polygon_area(cycle)
    lookup = {(pt[pair[0]], pt[pair[1]]): pt for pt in points}
    return LowDimVolume(2, area * area * gram, cycle=tuple(lookup[c] for c in cycle))


def polar_2d(Q: HPolyhedron, settings: Optional[Settings] = None) -> List[Vector]:
    """Vertices of the polar of a planar polytope with 0 in its interior.

    Q° is the convex hull of a_i / b_i over the rows of Q.

    Raises:
        ParameterError: 0 is not interior, or Q is not a bounded planar body
    """
    if Q.n != 2 or Q.equality_rows:
        raise ParameterError("polar_2d needs a planar inequality system")
    if any(v <= 0 for v in Q.b):
        raise ParameterError("The origin must lie in the interior")
    if not is_bounded(Q, settings):
        raise ParameterError("polar_2d needs a bounded polygon")
    return convex_hull_2d(tuple(x / Q.b[i] for x in Q.A.row(i)) for i in range(Q.m))


def area_2d(Q: HPolyhedron, settings: Optional[Settings] = None) -> Rational:
    """Area of a bounded full-dimensional planar polytope."""
    if Q.n != 2:
        raise DimensionError("area_2d needs a planar polytope")
    return polygon_area(convex_hull_2d(v.point for v in enumerate_vertices(Q, settings)))


def symmetric_polygon(generators: Iterable[Sequence[object]]) -> HPolyhedron:
    """{x : |g^T x| <= 1 for every generator g} as an inequality system."""
    rows: List[Vector] = []
    for g in generators:
        g = vector(g)
        rows.append(g)
        rows.append(tuple(-x for x in g))
    return HPolyhedron(ExactMatrix(rows), tuple(ONE for _ in rows))
