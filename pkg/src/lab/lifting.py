"""
Lifting - reduce a slice instance to a full-dimensional one.

For independent rows I with span P_I = ker A_I, a unimodular U with
A_I U = [L 0] turns ker A_I ∩ Z^n into U (0; Z^d). Reading P_I in those
coordinates gives an instance (Â, b̂, α̂) in dimension d with the same
kappa.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from sympy import Rational

from ..core.config import Settings
from ..core.exceptions import DimensionError, HypothesisError, IntegralityError, LiftDefectError, RankDeficiencyError
from ..core.logger import setup_logger
from .exactmath import (
    ZERO,
    ExactMatrix,
    IndexSet,
    Vector,
    det,
    dot,
    hermite_unimodular,
    is_integral_vector,
    vector,
)
from .polyhedron import HPolyhedron, dimension, enumerate_vertices, lattice_points, lp_max
from .proximity import NormalizedInstance, delta_I, kappa_I

logger = setup_logger(__name__)


@dataclass(frozen=True)
class LiftResult:
    """The lifted instance together with the coordinate change."""

    A_hat: ExactMatrix
    b_hat: Vector
    alpha_hat: Vector
    U: ExactMatrix
    alpha: Vector
    rows: IndexSet
    complement: IndexSet
    row_order: Tuple[int, ...]

    @property
    def d(self) -> int:
        return self.A_hat.cols

    @property
    def polyhedron(self) -> HPolyhedron:
        return HPolyhedron(self.A_hat, self.b_hat)

    def iso_map(self, x: Sequence[object]) -> Vector:
        """x -> (U^-1 x) restricted to the last d coordinates."""
        full = self.U.solve(vector(x))
        return full[self.U.cols - self.d :]

    def inverse_map(self, y: Sequence[object]) -> Vector:
        """y -> U (0; y)."""
        padding = [ZERO] * (self.U.cols - self.d)
        return self.U.apply(padding + list(vector(y)))

    def kappa(self, settings: Optional[Settings] = None) -> Rational:
        """kappa of the lifted instance in units of Delta(Â, α̂)."""
        scale = delta_I(self.A_hat, self.alpha_hat, IndexSet(), settings)
        value, _ = lp_max(self.polyhedron, self.alpha_hat, settings)
        return value / scale


def lift(
    norm: NormalizedInstance,
    alpha: Sequence[object],
    I: IndexSet,
    settings: Optional[Settings] = None,
) -> LiftResult:
    """Reduce the slice P_I to a full-dimensional instance.

    Args:
        norm: Normalized instance
        alpha: Integral objective
        I: Independent rows with span P_I = ker A_I

    Returns:
        LiftResult with Â = (AU)[Ī, J̄], b̂ = b[Ī], α̂ = (α^T U)[J̄]

    Raises:
        RankDeficiencyError: rows of A_I are dependent
        HypothesisError: the span of P_I is smaller than ker A_I
    """
    A = norm.base.A
    b = norm.base.b
    m, n = A.shape
    alpha = vector(alpha)
    if not is_integral_vector(alpha):
        raise IntegralityError("lift needs an integral objective")
    I = IndexSet.of(I, m)
    d = n - len(I)
    if d < 1:
        raise DimensionError(f"|I| = {len(I)} leaves no dimensions in R^{n}")
    if I:
        if A.select_rows(I).rank() != len(I):
            raise RankDeficiencyError(f"Rows {I.members} are linearly dependent")
        U, _ = hermite_unimodular(A.select_rows(I))
    else:
        U = ExactMatrix.identity(n)

    actual = dimension(norm.polyhedron.slice(I), settings)
    if actual != d:
        raise HypothesisError("span P_I = ker A_I", f"dim P_I = {actual}, expected {d}")

    complement = I.complement(m)
    tail = list(range(n - d, n))
    AU = A @ U
    result = LiftResult(
        A_hat=AU.submatrix(complement, tail),
        b_hat=tuple(b[i] for i in complement),
        alpha_hat=tuple(U.left_apply(alpha)[j] for j in tail),
        U=U,
        alpha=alpha,
        rows=I,
        complement=complement,
        row_order=tuple(I) + tuple(complement),
    )
    logger.debug(f"Lifted I={I.members} to a {result.A_hat.rows}x{d} instance")
    return result


def _sample_points(norm: NormalizedInstance, lifted: LiftResult, settings: Optional[Settings]) -> List[Vector]:
    sliced = norm.polyhedron.slice(lifted.rows)
    points = [v.point for v in enumerate_vertices(sliced, settings)]
    points.extend(lifted.inverse_map([1 if j == i else 0 for j in range(lifted.d)]) for i in range(lifted.d))
    return points


def verify_lift(norm: NormalizedInstance, lifted: LiftResult, settings: Optional[Settings] = None) -> bool:
    """Check the lift identities exactly.

    Raises:
        LiftDefectError: naming the identity that fails
    """
    A = norm.base.A
    if not lifted.U.is_integral or abs(det(lifted.U)) != 1:
        raise LiftDefectError("U unimodular", f"det U = {det(lifted.U)}")

    for x in _sample_points(norm, lifted, settings):
        y = lifted.iso_map(x)
        if dot(lifted.alpha, x) != dot(lifted.alpha_hat, y):
            raise LiftDefectError("objective transport", f"at x = {x}")
        if lifted.inverse_map(y) != vector(x):
            raise LiftDefectError("coordinate map", f"x = {x} does not round-trip")

    expected = delta_I(A, lifted.alpha, lifted.rows, settings)
    lifted_delta = delta_I(lifted.A_hat, lifted.alpha_hat, IndexSet(), settings)
    if lifted_delta != expected:
        raise LiftDefectError("Delta(Â, α̂) = Delta_I(A, α)", f"{lifted_delta} != {expected}")

    if expected != 0:
        original = kappa_I(norm, lifted.alpha, lifted.rows, settings)
        if lifted.kappa(settings) != original:
            raise LiftDefectError("kappa identity", f"{lifted.kappa(settings)} != {original}")

    origin = tuple(0 for _ in range(lifted.d))
    if lattice_points(lifted.polyhedron, settings=settings) != [origin]:
        raise LiftDefectError("P(Â, b̂) ∩ Z^d = {0}", "extra lattice points after lifting")

    logger.debug(f"Lift of I={lifted.rows.members} verified")
    return True
