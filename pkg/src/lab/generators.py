"""
Generators - instance families for the proximity checks.

Three sources: the structured lower-bound family P_{Δ,n,k} whose optimal
vertex sits Δ-2 away from the only lattice point, seeded random integral
instances, and strictly Δ-modular instances A = T B carrying their
factorization.
"""

import time
from dataclasses import dataclass, field
from datetime import datetime
from itertools import product
from math import prod
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from sympy import Integer, Rational
from tenacity import RetryError, Retrying, retry_if_exception_type, stop_after_attempt

from ..core.config import Settings, get_settings
from ..core.exceptions import (
    CertificationError,
    ParameterError,
    ResampleBudgetError,
    ResourceCapError,
)
from ..core.logger import setup_logger
from .exactmath import (
    ZERO,
    ExactMatrix,
    Vector,
    det,
    inf_norm,
    independent_rows,
    is_integral_vector,
    is_totally_unimodular,
    max_abs_minor,
    vector,
)
from .polyhedron import (
    HPolyhedron,
    LatticePoint,
    bounding_box,
    dimension,
    is_bounded,
    lp_max,
    shares_facet,
)
from .proximity import Instance, measure_proximity

logger = setup_logger(__name__)


class _Rejected(Exception):
    """A random draw failed a construction requirement."""


# ---------------------------------------------------------------------------
# Lower-bound family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LowerBoundInstance:
    """P_{Δ,n,k} = {0 <= B x <= rhs, a_i x <= 0 for i < k} with its witnesses."""

    delta: int
    n: int
    k: int
    B: ExactMatrix
    beta: Vector
    rhs: Vector
    cutting_rows: ExactMatrix
    T: ExactMatrix
    A: ExactMatrix
    b: Vector
    c: Vector
    x_star: Vector

    @property
    def instance(self) -> Instance:
        return Instance(self.A, self.b, self.c)

    @property
    def polyhedron(self) -> HPolyhedron:
        return HPolyhedron(self.A, self.b)

    @property
    def box_polyhedron(self) -> HPolyhedron:
        """P(B) = {0 <= B x <= rhs}."""
        return HPolyhedron(self.B.vstack(-self.B), self.rhs + tuple(ZERO for _ in self.rhs))

    def box_lattice_points(self, settings: Optional[Settings] = None) -> List[LatticePoint]:
        """P(B) ∩ Z^n, read off the integral y = B x with 0 <= y <= rhs."""
        settings = settings or get_settings()
        size = prod(int(r) + 1 for r in self.rhs)
        if size > settings.cap_box:
            raise ResourceCapError(f"Box scan of {size} points exceeds cap {settings.cap_box}")
        inverse = self.B.inverse()
        points = []
        for y in product(*(range(int(r) + 1) for r in self.rhs)):
            x = inverse.apply(y)
            if is_integral_vector(x):
                points.append(tuple(int(v) for v in x))
        return sorted(points)


def gen_lower_bound(delta: int, n: int, k: int) -> LowerBoundInstance:
    """Assemble P_{Δ,n,k}.

    Raises:
        ParameterError: unless Δ >= 3, n >= 2, 0 <= k <= n-1 and Δ-n+k >= 1
    """
    if delta < 3 or n < 2 or not 0 <= k <= n - 1 or delta - n + k < 1:
        raise ParameterError(f"P_(Δ,n,k) needs Δ>=3, n>=2, 0<=k<=n-1, Δ-n+k>=1; got Δ={delta}, n={n}, k={k}")

    beta = tuple(Integer(0) if j < k else Integer(delta - 1) for j in range(n - 1))
    rows = [[1 if j == i else 0 for j in range(n)] for i in range(n - 1)]
    rows.append(list(beta) + [delta])
    B = ExactMatrix(rows, cols=n)
    rhs = vector([1] * k + [delta - n + k] + [1] * (n - k - 1))

    cutting = [[1 if j == i else 0 for j in range(k)] + [-delta] * (n - k) for i in range(k)]
    cutting_rows = ExactMatrix(cutting, cols=n)
    identity = [[1 if j == i else 0 for j in range(n)] for i in range(n)]
    combos = [[1 if j == i else 0 for j in range(k)] + [-1] * (n - k) for i in range(k)]
    T = ExactMatrix(identity + [[-x for x in r] for r in identity] + combos, cols=n)

    A = B.vstack(-B).vstack(cutting_rows)
    b = rhs + tuple(ZERO for _ in range(n + k))
    c = tuple(sum(col) for col in zip(*B.row_list()))
    x_star = B.solve(rhs)
    logger.debug(f"Built P_(Δ={delta}, n={n}, k={k}) with x*={x_star}")
    return LowerBoundInstance(delta, n, k, B, beta, rhs, cutting_rows, T, A, b, c, x_star)


def all_constraints_tight(P: HPolyhedron, settings: Optional[Settings] = None) -> bool:
    """Every inequality row attains equality somewhere on P."""
    return all(lp_max(P, P.A.row(i), settings)[0] == P.b[i] for i in range(P.m))


@dataclass
class LowerBoundCertificate:
    """Outcome of every claim checked on a lower-bound instance."""

    delta: int
    n: int
    k: int
    claims: Dict[str, bool] = field(default_factory=dict)
    proximity: Optional[Rational] = None
    delta_table: List[Rational] = field(default_factory=list)
    box_lattice_count: int = 0

    @property
    def holds(self) -> bool:
        return all(self.claims.values())


def certify_lower_bound(inst: LowerBoundInstance, settings: Optional[Settings] = None) -> LowerBoundCertificate:
    """Check every claim about P_{Δ,n,k} by exact computation.

    Lattice points come from the box P(B) ⊇ P rather than a bounding-box
    scan. The proximity is read off as ‖x*‖∞ when c = 1^T B; a full
    measurement is only run if that value misses Δ - 2.

    Raises:
        CertificationError: naming the first claim that fails
    """
    settings = settings or get_settings()
    P = inst.polyhedron
    n, k, delta = inst.n, inst.k, inst.delta
    origin = tuple(0 for _ in range(n))
    cert = LowerBoundCertificate(delta, n, k)
    claims = cert.claims

    box_points = inst.box_lattice_points(settings)
    cert.box_lattice_count = len(box_points)

    claims["x* ∈ P"] = P.contains(inst.x_star)
    claims["x* shares no facet with 0"] = claims["x* ∈ P"] and not shares_facet(P, inst.x_star, origin, settings)
    claims["P ∩ Z^n = {0}"] = [p for p in box_points if P.contains(p)] == [origin]
    claims["A = T B with T totally unimodular"] = inst.T @ inst.B == inst.A and is_totally_unimodular(inst.T, settings)
    claims["|det B| = Δ"] = abs(det(inst.B)) == delta
    claims["P full-dimensional"] = dimension(P, settings) == n

    claims["|P(B) ∩ Z^n| = 2^k"] = len(box_points) == 2**k
    inverse = inst.B.inverse()
    claims["first k columns of B^-1 integral"] = all(is_integral_vector(inverse.column(j)) for j in range(k))

    cert.delta_table = [max_abs_minor(inst.A, j, settings) for j in range(1, n + 1)]
    if k == n - 2:
        claims["Δ_(n-1)(A) = Δ"] = cert.delta_table[n - 2] == delta
    if claims["P ∩ Z^n = {0}"] and claims["x* ∈ P"]:
        box_objective = tuple(sum(col) for col in zip(*inst.B.row_list()))
        if inst.c == box_objective:
            # x* is the only maximizer of 1^T B x over P(B) ⊇ P
            cert.proximity = inf_norm(inst.x_star)
        if cert.proximity is None or (k == n - 2 and cert.proximity != delta - 2):
            logger.debug(f"P_(Δ={delta}, n={n}, k={k}): measuring proximity in full")
            cert.proximity = measure_proximity(inst.instance, settings=settings).proximity
        if k == n - 2:
            claims["proximity = Δ - 2"] = cert.proximity == delta - 2
    if k == n - 1:
        claims["‖x*‖∞ = 1"] = inf_norm(inst.x_star) == 1
        claims["‖b‖∞ = Δ - 1"] = inf_norm(inst.b) == delta - 1
        claims["every constraint tight on P"] = all_constraints_tight(P, settings)

    for claim, ok in claims.items():
        if not ok:
            logger.error(f"P_(Δ={delta}, n={n}, k={k}) fails: {claim}")
            raise CertificationError(claim, f"Δ={delta}, n={n}, k={k}")
    logger.info(f"Certified P_(Δ={delta}, n={n}, k={k}): {len(claims)} claims")
    return cert


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------


def _resample(draw: Callable[[], Any], budget: int, what: str) -> Any:
    try:
        for attempt in Retrying(stop=stop_after_attempt(budget), retry=retry_if_exception_type(_Rejected)):
            with attempt:
                result = draw()
    except RetryError as e:
        raise ResampleBudgetError(f"{what}: no valid draw in {budget} attempts") from e
    return result


def _feasible_rhs(rng: np.random.Generator, A: ExactMatrix, bound: int) -> Tuple[Vector, List[int]]:
    """b = A z0 + s for a random integral z0 and slack s >= 0."""
    z0 = rng.integers(-bound, bound + 1, size=A.cols).tolist()
    slack = rng.integers(0, bound + 1, size=A.rows).tolist()
    b = tuple(v + s for v, s in zip(A.apply(z0), slack))
    return b, z0


def _objective(rng: np.random.Generator, n: int, bound: int) -> List[int]:
    c = rng.integers(-bound, bound + 1, size=n).tolist()
    if not any(c):
        raise _Rejected("zero objective")
    return c


def _check_measurable(inst: Instance, settings: Settings) -> None:
    if not is_bounded(inst.polyhedron, settings):
        raise _Rejected("unbounded")
    size = 1
    for lo, hi in bounding_box(inst.polyhedron, settings):
        size *= hi - lo + 1
    if size > settings.cap_box:
        raise _Rejected(f"bounding box of {size} points")


def gen_random(n: int, m: int, entry_bound: int, seed: int, settings: Optional[Settings] = None) -> Instance:
    """Seeded random instance with bounded P and a feasible integer program.

    When the rows fail to span R^n positively, the row -(sum of a basis) is
    appended, so the result can have m + 1 rows.

    Raises:
        ParameterError: n < 1, m < n or entry_bound < 1
        ResampleBudgetError: no valid draw within the resample budget
    """
    settings = settings or get_settings()
    if n < 1 or m < n or entry_bound < 1:
        raise ParameterError(f"gen_random needs n>=1, m>=n, entry_bound>=1; got n={n}, m={m}, bound={entry_bound}")
    rng = np.random.default_rng(seed)

    def draw() -> Instance:
        rows = rng.integers(-entry_bound, entry_bound + 1, size=(m, n)).tolist()
        A = ExactMatrix(rows, cols=n)
        if A.rank() < n:
            raise _Rejected("rank deficient")
        if not is_bounded(HPolyhedron(A, [0] * m), settings):
            basis = independent_rows(A)
            closing = [-sum(rows[i][j] for i in basis) for j in range(n)]
            A = A.vstack(ExactMatrix([closing], cols=n))
            logger.debug(f"seed={seed}: appended closing row {closing}")
        b, _ = _feasible_rhs(rng, A, entry_bound)
        inst = Instance(A, b, _objective(rng, n, entry_bound))
        _check_measurable(inst, settings)
        return inst

    return _resample(draw, settings.resample_budget, f"gen_random(n={n}, m={m}, seed={seed})")


T_SOURCES = ("interval", "network", "auto")


def _interval_row(rng: np.random.Generator, n: int) -> List[int]:
    lo = int(rng.integers(0, n))
    hi = int(rng.integers(lo, n))
    sign = 1 if rng.integers(0, 2) else -1
    return [sign if lo <= j <= hi else 0 for j in range(n)]


def _interval_rows(rng: np.random.Generator, n: int, extra: int) -> List[List[int]]:
    """[I; -1^T; random signed intervals]."""
    rows = [[1 if j == i else 0 for j in range(n)] for i in range(n)]
    rows.append([-1] * n)
    rows.extend(_interval_row(rng, n) for _ in range(extra))
    return rows


@dataclass(frozen=True)
class DirectedTree:
    """Spanning tree on nodes 0..n; arc j joins node j+1 and its parent."""

    parent: Tuple[int, ...]
    upward: Tuple[bool, ...]

    @classmethod
    def draw(cls, rng: np.random.Generator, n: int) -> "DirectedTree":
        parent = tuple(int(rng.integers(0, j + 1)) for j in range(n))
        upward = tuple(bool(rng.integers(0, 2)) for _ in range(n))
        return cls(parent, upward)

    def _to_root(self, node: int) -> List[int]:
        path = []
        while node:
            path.append(node)
            node = self.parent[node - 1]
        return path + [0]

    def path_row(self, u: int, v: int) -> List[int]:
        """Signed incidence of the tree path u -> v on the arcs."""
        up, down = self._to_root(u), self._to_root(v)
        common = set(up) & set(down)
        row = [0] * len(self.parent)
        for node in up:
            if node in common:
                break
            row[node - 1] = 1 if self.upward[node - 1] else -1
        for node in down:
            if node in common:
                break
            row[node - 1] = -1 if self.upward[node - 1] else 1
        return row


def _network_rows(rng: np.random.Generator, n: int, extra: int) -> List[List[int]]:
    """[I; -I; random path rows] of one directed tree, a network matrix."""
    tree = DirectedTree.draw(rng, n)
    rows = [[1 if j == i else 0 for j in range(n)] for i in range(n)]
    rows.extend([-x for x in r] for r in rows[:n])
    while len(rows) < 2 * n + extra:
        u, v = (int(x) for x in rng.choice(n + 1, size=2, replace=False))
        row = tree.path_row(u, v)
        if any(row):
            rows.append(row)
    return rows


def _diagonal_factors(rng: np.random.Generator, n: int, delta: int) -> List[int]:
    diag = [1] * n
    remaining, p = delta, 2
    while remaining > 1:
        while remaining % p == 0:
            diag[int(rng.integers(0, n))] *= p
            remaining //= p
        p += 1
    return diag


def gen_strictly_delta_modular(
    n: int,
    m: int,
    delta: int,
    seed: int,
    entry_bound: int = 2,
    settings: Optional[Settings] = None,
    t_source: str = "auto",
) -> Tuple[Instance, ExactMatrix, ExactMatrix]:
    """Random A = T B with T totally unimodular and |det B| = Δ.

    ``t_source`` picks T:

    - "interval": the identity, the row -1^T and random signed interval rows
    - "network": ±identity and random path rows of one directed tree (m >= 2n)
    - "auto": one of the two drawn from the seed; interval when m < 2n

    Both keep P bounded. B is lower triangular with diagonal product Δ,
    scrambled by unimodular column operations.

    Raises:
        ParameterError: Δ < 1, m < n + 1, an unknown t_source, or network with m < 2n
    """
    settings = settings or get_settings()
    if delta < 1 or n < 1 or m < n + 1:
        raise ParameterError(f"Strictly Δ-modular draw needs Δ>=1, n>=1, m>=n+1; got Δ={delta}, n={n}, m={m}")
    if t_source not in T_SOURCES:
        raise ParameterError(f"Unknown T source '{t_source}'; choose from {list(T_SOURCES)}")
    if t_source == "network" and m < 2 * n:
        raise ParameterError(f"Network T needs m >= 2n; got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    if t_source == "auto":
        t_source = "network" if m >= 2 * n and rng.integers(0, 2) else "interval"

    def draw() -> Tuple[Instance, ExactMatrix, ExactMatrix]:
        if t_source == "network":
            T = ExactMatrix(_network_rows(rng, n, m - 2 * n), cols=n)
        else:
            T = ExactMatrix(_interval_rows(rng, n, m - n - 1), cols=n)

        diag = _diagonal_factors(rng, n, delta)
        b_rows = [
            [diag[i] if j == i else (int(rng.integers(-entry_bound, entry_bound + 1)) if j < i else 0) for j in range(n)]
            for i in range(n)
        ]
        for _ in range(n):
            src, dst = (int(x) for x in rng.choice(n, size=2, replace=False)) if n > 1 else (0, 0)
            if src == dst:
                break
            factor = int(rng.integers(-1, 2))
            for row in b_rows:
                row[dst] += factor * row[src]
        B = ExactMatrix(b_rows, cols=n)
        A = T @ B
        b, _ = _feasible_rhs(rng, A, entry_bound)
        inst = Instance(A, b, _objective(rng, n, entry_bound))
        _check_measurable(inst, settings)
        return inst, T, B

    inst, T, B = _resample(draw, settings.resample_budget, f"gen_strictly_delta_modular(n={n}, Δ={delta}, seed={seed})")
    logger.debug(f"seed={seed}: strictly {delta}-modular {inst.m}x{n} instance, {t_source} T")
    return inst, T, B


# ---------------------------------------------------------------------------
# Batches
# ---------------------------------------------------------------------------

REQUIRED_PARAMS = {
    "lowerbound": ("delta", "n", "k"),
    "random": ("n", "m"),
    "sdm": ("n", "m", "delta"),
}


@dataclass
class GeneratedInstance:
    """One draw with its provenance and witnesses."""

    kind: str
    seed: Optional[int]
    params: Dict[str, Any]
    instance: Instance
    witness: Optional[Tuple[ExactMatrix, ExactMatrix]] = None
    lower_bound: Optional[LowerBoundInstance] = None

    @property
    def appended_rows(self) -> int:
        return self.instance.m - self.params["m"] if "m" in self.params else 0


class InstanceGenerator:
    """
    Seeded instance generation with history tracking.

    Every generator kind goes through ``generate``; batches draw seed by
    seed starting at ``seed_start`` and skip seeds that exhaust the
    resample budget.
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.logger = logger
        self.settings = settings or get_settings()
        self.generation_history: List[Dict[str, Any]] = []
        self.total_generated = 0
        self.total_failures = 0

    def generate(self, kind: str, seed: Optional[int] = None, **params: Any) -> GeneratedInstance:
        """
        Draw one instance.

        Args:
            kind: "lowerbound", "random" or "sdm"
            seed: Seed for the random kinds (ignored by lowerbound)
            **params: delta, n, k (lowerbound); n, m, entry_bound (random);
                n, m, delta, entry_bound, t_source (sdm)

        Raises:
            ParameterError: unknown kind or a missing parameter
        """
        if kind not in REQUIRED_PARAMS:
            raise ParameterError(f"Unknown instance kind '{kind}'; choose from {sorted(REQUIRED_PARAMS)}")
        missing = [name for name in REQUIRED_PARAMS[kind] if params.get(name) is None]
        if missing:
            raise ParameterError(f"{kind} needs {', '.join(missing)}")

        if kind == "lowerbound":
            lb = gen_lower_bound(params["delta"], params["n"], params["k"])
            result = GeneratedInstance(kind, None, dict(params), lb.instance, (lb.T, lb.B), lb)
        elif kind == "random":
            seed = seed or 0
            params.setdefault("entry_bound", 3)
            inst = gen_random(params["n"], params["m"], params["entry_bound"], seed, self.settings)
            result = GeneratedInstance(kind, seed, dict(params), inst)
        else:
            seed = seed or 0
            params.setdefault("entry_bound", 2)
            inst, T, B = gen_strictly_delta_modular(
                params["n"],
                params["m"],
                params["delta"],
                seed,
                params["entry_bound"],
                self.settings,
                params.get("t_source", "auto"),
            )
            result = GeneratedInstance(kind, seed, dict(params), inst, (T, B))
        self.total_generated += 1
        return result

    def generate_batch(self, kind: str, count: int, seed_start: int = 0, **params: Any) -> List[GeneratedInstance]:
        """
        Generate ``count`` instances of one random kind.

        Args:
            kind: "random" or "sdm"
            count: Number of instances
            seed_start: First seed
            **params: as for ``generate``

        Returns:
            The draws, in seed order
        """
        if kind == "lowerbound":
            raise ParameterError("lowerbound instances are not seeded; use generate")
        start_time = time.time()
        batch = []
        failed = []
        seed = seed_start
        max_attempts = count * 10
        attempts = 0

        while len(batch) < count and attempts < max_attempts:
            attempts += 1
            try:
                batch.append(self.generate(kind, seed, **params))
            except ResampleBudgetError as e:
                self.logger.warning(f"Generation failed for seed {seed}: {e}")
                failed.append({"seed": seed, "error": str(e)})
            seed += 1

        duration_ms = (time.time() - start_time) * 1000
        self.total_failures += len(failed)
        self.generation_history.append(
            {
                "timestamp": datetime.now().isoformat(),
                "kind": kind,
                "params": dict(params),
                "requested": count,
                "generated": len(batch),
                "failed": len(failed),
                "duration_ms": round(duration_ms, 2),
            }
        )
        self.logger.info(f"Generated {len(batch)}/{count} {kind} instances ({len(failed)} failed) in {duration_ms:.0f}ms")
        return batch
