"""
Exact Math - rational scalars, vectors and matrices.

Every other lab module consumes these types. Scalars are sympy Rationals,
matrices wrap an immutable sympy matrix, and nothing is ever rounded.

Provides:
- ExactMatrix / IndexSet value types
- determinants (fraction-free Bareiss elimination)
- Delta_k (largest absolute k x k minor) and gcd of maximal minors
- column-style Hermite normal form with its unimodular transform
- exhaustive total-unimodularity test
"""

import numbers
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb, gcd
from typing import Any, Iterable, Iterator, List, Optional, Sequence, Tuple

from sympy import ImmutableMatrix, Integer, Rational

from ..core.config import Settings, get_settings
from ..core.exceptions import (
    DimensionError,
    IntegralityError,
    InstanceFormatError,
    RankDeficiencyError,
    ResourceCapError,
    UndefinedGcdError,
)
from ..core.logger import setup_logger

logger = setup_logger(__name__)

ExactScalar = Rational
Vector = Tuple[Rational, ...]

ZERO = Integer(0)
ONE = Integer(1)


# ---------------------------------------------------------------------------
# Scalars and vectors
# ---------------------------------------------------------------------------


def to_scalar(value: Any) -> Rational:
    """Convert ints, "p/q" strings, Fractions and sympy numbers to a Rational."""
    if isinstance(value, Rational):
        return value
    if isinstance(value, bool):
        raise InstanceFormatError(f"Not a rational: {value!r}")
    if isinstance(value, numbers.Integral):
        return Integer(int(value))
    if hasattr(value, "__index__"):
        # gmpy2 mpz and numpy integers
        return Integer(value.__index__())
    if isinstance(value, Fraction):
        return Rational(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, _, den = text.partition("/")
            try:
                p, q = int(num), int(den)
            except ValueError as e:
                raise InstanceFormatError(f"Not a rational: {value!r}") from e
            if q == 0:
                raise InstanceFormatError(f"Zero denominator in {value!r}")
            return Rational(p, q)
        try:
            return Integer(int(text))
        except ValueError as e:
            raise InstanceFormatError(f"Not a rational: {value!r}") from e
    raise InstanceFormatError(f"Not a rational: {value!r}")


def format_scalar(value: Rational) -> str:
    """Render as "p" or "p/q" (decimal digits, reduced)."""
    value = to_scalar(value)
    return str(value.p) if value.q == 1 else f"{value.p}/{value.q}"


def vector(values: Iterable[Any]) -> Vector:
    return tuple(to_scalar(v) for v in values)


def unit_vector(n: int, i: int, sign: int = 1) -> Vector:
    return tuple(Integer(sign) if j == i else ZERO for j in range(n))


def dot(u: Sequence[Rational], v: Sequence[Rational]) -> Rational:
    if len(u) != len(v):
        raise DimensionError(f"Length mismatch: {len(u)} vs {len(v)}")
    total = ZERO
    for a, b in zip(u, v):
        if a != 0 and b != 0:
            total += a * b
    return total


def add(u: Sequence[Rational], v: Sequence[Rational]) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Sequence[Rational], v: Sequence[Rational]) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def scale(t: Any, u: Sequence[Rational]) -> Vector:
    t = to_scalar(t)
    return tuple(t * a for a in u)


def inf_norm(u: Sequence[Rational]) -> Rational:
    return max((abs(a) for a in u), default=ZERO)


def norm2_squared(u: Sequence[Rational]) -> Rational:
    return sum((a * a for a in u), ZERO)


def is_integral_vector(u: Sequence[Rational]) -> bool:
    return all(to_scalar(a).q == 1 for a in u)


def is_zero_vector(u: Sequence[Rational]) -> bool:
    return all(a == 0 for a in u)


def gcd_of(values: Iterable[Any]) -> int:
    """Non-negative gcd of integers (0 for an all-zero list)."""
    g = 0
    for v in values:
        g = gcd(g, int(v))
        if g == 1:
            break
    return g


def extended_gcd(a: int, b: int) -> Tuple[int, int, int]:
    """(x, y, g) with x a + y b = g = gcd(a, b) >= 0, all plain ints."""
    a, b = int(a), int(b)
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        return -old_x, -old_y, -old_r
    return old_x, old_y, old_r


# ---------------------------------------------------------------------------
# Index sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IndexSet:
    """Sorted distinct row indices (0-based)."""

    members: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        for a, b in zip(self.members, self.members[1:]):
            if a >= b:
                raise DimensionError(f"Index set not strictly increasing: {self.members}")
        if self.members and self.members[0] < 0:
            raise DimensionError(f"Negative index in {self.members}")

    @classmethod
    def of(cls, indices: Iterable[int], m: Optional[int] = None) -> "IndexSet":
        items = [int(i) for i in indices]
        if len(set(items)) != len(items):
            raise DimensionError(f"Duplicate indices in {items}")
        result = cls(tuple(sorted(items)))
        if m is not None:
            result.check_range(m)
        return result

    def check_range(self, m: int) -> None:
        if self.members and self.members[-1] >= m:
            raise DimensionError(f"Index {self.members[-1]} out of range for {m} rows")

    def union(self, other: Iterable[int]) -> "IndexSet":
        return IndexSet(tuple(sorted(set(self.members) | set(other))))

    def difference(self, other: Iterable[int]) -> "IndexSet":
        drop = set(other)
        return IndexSet(tuple(i for i in self.members if i not in drop))

    def complement(self, m: int) -> "IndexSet":
        keep = set(self.members)
        return IndexSet(tuple(i for i in range(m) if i not in keep))

    def issubset(self, other: "IndexSet") -> bool:
        return set(self.members) <= set(other.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, item: object) -> bool:
        return item in self.members

    def __repr__(self) -> str:
        return f"IndexSet{self.members}"


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


class ExactMatrix:
    """Immutable dense matrix of Rationals."""

    __slots__ = ("_rows", "_shape", "_sym", "_integral", "_hash")

    def __init__(self, rows: Sequence[Sequence[Any]], cols: Optional[int] = None):
        data = tuple(tuple(to_scalar(x) for x in row) for row in rows)
        if data:
            width = len(data[0])
            if any(len(row) != width for row in data):
                raise DimensionError("Ragged matrix rows")
        else:
            width = cols or 0
        self._rows: Tuple[Vector, ...] = data
        self._shape = (len(data), width)
        self._sym: Optional[ImmutableMatrix] = None
        self._integral = all(x.q == 1 for row in data for x in row)
        self._hash: Optional[int] = None

    # -- construction -----------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], cols=n)

    @classmethod
    def from_sympy(cls, matrix: Any) -> "ExactMatrix":
        return cls(matrix.tolist(), cols=matrix.shape[1])

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[Any]]) -> "ExactMatrix":
        if not columns:
            return cls([])
        return cls([list(row) for row in zip(*columns)])

    # -- shape and access -------------------------------------------------

    @property
    def rows(self) -> int:
        return self._shape[0]

    @property
    def cols(self) -> int:
        return self._shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self._shape

    @property
    def is_integral(self) -> bool:
        return self._integral

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def row(self, i: int) -> Vector:
        return self._rows[i]

    def column(self, j: int) -> Vector:
        return tuple(row[j] for row in self._rows)

    def entry(self, i: int, j: int) -> Rational:
        return self._rows[i][j]

    def row_list(self) -> Tuple[Vector, ...]:
        return self._rows

    def to_int_lists(self) -> List[List[int]]:
        self.require_integral("to_int_lists")
        return [[int(x) for x in row] for row in self._rows]

    def to_sympy(self) -> ImmutableMatrix:
        if self._sym is None:
            self._sym = ImmutableMatrix(self.rows, self.cols, [x for row in self._rows for x in row])
        return self._sym

    def require_integral(self, what: str) -> None:
        if not self._integral:
            raise IntegralityError(f"{what} requires an integral matrix")

    # -- structure --------------------------------------------------------

    def submatrix(self, row_idx: Iterable[int], col_idx: Optional[Iterable[int]] = None) -> "ExactMatrix":
        rows = list(row_idx)
        cols = list(range(self.cols)) if col_idx is None else list(col_idx)
        return ExactMatrix([[self._rows[i][j] for j in cols] for i in rows], cols=len(cols))

    def select_rows(self, rows: Iterable[int]) -> "ExactMatrix":
        return self.submatrix(rows)

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix([list(col) for col in zip(*self._rows)], cols=self.rows) if self._rows else ExactMatrix([], cols=0)

    def vstack(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.rows and other.rows and self.cols != other.cols:
            raise DimensionError(f"Cannot stack {self.shape} over {other.shape}")
        return ExactMatrix(list(self._rows) + list(other._rows), cols=self.cols or other.cols)

    def with_row_first(self, first: Sequence[Any]) -> "ExactMatrix":
        """The matrix (first ; self)."""
        return ExactMatrix([list(first)] + [list(r) for r in self._rows], cols=len(first))

    # -- algebra ----------------------------------------------------------

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise DimensionError(f"Cannot multiply {self.shape} by {other.shape}")
        columns = [other.column(j) for j in range(other.cols)]
        return ExactMatrix(
            [[dot(row, col) for col in columns] for row in self._rows],
            cols=other.cols,
        )

    def apply(self, v: Sequence[Any]) -> Vector:
        """Matrix-vector product."""
        v = vector(v)
        if len(v) != self.cols:
            raise DimensionError(f"Cannot apply {self.shape} to a length-{len(v)} vector")
        return tuple(dot(row, v) for row in self._rows)

    def left_apply(self, y: Sequence[Any]) -> Vector:
        """Row-vector product y^T M."""
        y = vector(y)
        if len(y) != self.rows:
            raise DimensionError(f"Cannot left-apply length-{len(y)} vector to {self.shape}")
        return tuple(dot(y, self.column(j)) for j in range(self.cols))

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix([[-x for x in row] for row in self._rows], cols=self.cols)

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.shape != other.shape:
            raise DimensionError(f"Cannot add {self.shape} and {other.shape}")
        return ExactMatrix([add(a, b) for a, b in zip(self._rows, other._rows)], cols=self.cols)

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return self + (-other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self._shape == other._shape and self._rows == other._rows

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._shape, self._rows))
        return self._hash

    def __repr__(self) -> str:
        body = "; ".join(" ".join(format_scalar(x) for x in row) for row in self._rows)
        return f"ExactMatrix[{body}]"

    # -- linear algebra ---------------------------------------------------

    def rank(self) -> int:
        if self.rows == 0 or self.cols == 0:
            return 0
        return int(self.to_sympy().rank())

    def inverse(self) -> "ExactMatrix":
        if not self.is_square:
            raise DimensionError(f"Cannot invert a {self.shape} matrix")
        if det(self) == 0:
            raise RankDeficiencyError("Matrix is singular")
        return ExactMatrix.from_sympy(self.to_sympy().inv())

    def solve(self, rhs: Sequence[Any]) -> Vector:
        """Unique solution of M x = rhs for square invertible M."""
        if not self.is_square:
            raise DimensionError(f"Cannot solve with a {self.shape} matrix")
        if len(rhs) != self.rows:
            raise DimensionError("Right-hand side length mismatch")
        if det(self) == 0:
            raise RankDeficiencyError("Matrix is singular")
        column = ImmutableMatrix(self.rows, 1, list(vector(rhs)))
        solution = self.to_sympy().LUsolve(column)
        return tuple(to_scalar(x) for x in solution)

    def nullspace(self) -> List[Vector]:
        """Basis of the right kernel."""
        if self.rows == 0:
            return [unit_vector(self.cols, j) for j in range(self.cols)]
        return [tuple(to_scalar(x) for x in v) for v in self.to_sympy().nullspace()]


def independent_rows(M: ExactMatrix, candidates: Optional[Iterable[int]] = None, start: Iterable[int] = ()) -> List[int]:
    """Greedy maximal linearly independent subset of rows.

    Rows in ``start`` are taken first (and must be independent); the result
    lists only the rows added from ``candidates``.
    """
    chosen = list(start)
    base_rank = M.select_rows(chosen).rank() if chosen else 0
    if base_rank != len(chosen):
        raise RankDeficiencyError(f"Starting rows {chosen} are dependent")
    added: List[int] = []
    pool = range(M.rows) if candidates is None else candidates
    for i in pool:
        if i in chosen:
            continue
        if M.select_rows(chosen + [i]).rank() == len(chosen) + 1:
            chosen.append(i)
            added.append(i)
            if len(chosen) == M.cols:
                break
    return added


def _subset_budget(count: int, what: str, settings: Optional[Settings]) -> None:
    cap = (settings or get_settings()).cap_subsets
    if count > cap:
        raise ResourceCapError(f"{what} would visit {count} subsets (cap {cap})")


# ---------------------------------------------------------------------------
# Determinants and minors
# ---------------------------------------------------------------------------


def det(M: ExactMatrix) -> Rational:
    """Exact determinant via fraction-free (Bareiss) elimination."""
    if not M.is_square:
        raise DimensionError(f"Determinant of a non-square {M.shape} matrix")
    if M.rows == 0:
        return ONE
    if M.rows == 1:
        return M.entry(0, 0)
    if M.rows == 2:
        return M.entry(0, 0) * M.entry(1, 1) - M.entry(0, 1) * M.entry(1, 0)
    return to_scalar(M.to_sympy().det(method="bareiss"))


def distinct_rows_up_to_sign(M: ExactMatrix) -> ExactMatrix:
    """M without zero rows and rows equal to an earlier row up to sign.

    Every minor of M is zero or equals a minor of the result up to sign.
    """
    seen = set()
    keep = []
    for row in M.row_list():
        if is_zero_vector(row):
            continue
        lead = next(x for x in row if x != 0)
        key = row if lead > 0 else tuple(-x for x in row)
        if key not in seen:
            seen.add(key)
            keep.append(row)
    return ExactMatrix(keep, cols=M.cols)


@lru_cache(maxsize=4096)
def _max_abs_minor(M: ExactMatrix, k: int) -> Rational:
    best = ZERO
    for rows in combinations(range(M.rows), k):
        block = M.select_rows(rows)
        for cols in combinations(range(M.cols), k):
            value = abs(det(block.submatrix(range(k), cols)))
            if value > best:
                best = value
    return best


def max_abs_minor(M: ExactMatrix, k: int, settings: Optional[Settings] = None) -> Rational:
    """Delta_k(M): the largest |det| over all k x k submatrices."""
    M.require_integral("max_abs_minor")
    if not 1 <= k <= min(M.rows, M.cols):
        raise DimensionError(f"Minor order {k} out of range for a {M.shape} matrix")
    M = distinct_rows_up_to_sign(M)
    _subset_budget(comb(M.rows, k) * comb(M.cols, k), "max_abs_minor", settings)
    return _max_abs_minor(M, k)


def delta_table(M: ExactMatrix, settings: Optional[Settings] = None) -> List[Rational]:
    """[Delta_1, ..., Delta_min(m,n)]."""
    return [max_abs_minor(M, k, settings) for k in range(1, min(M.rows, M.cols) + 1)]


def gcd_minors(M: ExactMatrix, settings: Optional[Settings] = None) -> Rational:
    """gcd of the absolute values of all r x r minors, r = rank(M)."""
    M.require_integral("gcd_minors")
    r = M.rank()
    if r == 0:
        raise UndefinedGcdError("gcd of minors of a zero matrix is undefined")
    _subset_budget(comb(M.rows, r) * comb(M.cols, r), "gcd_minors", settings)
    g = 0
    for rows in combinations(range(M.rows), r):
        block = M.select_rows(rows)
        for cols in combinations(range(M.cols), r):
            g = gcd(g, int(det(block.submatrix(range(r), cols))))
            if g == 1:
                return ONE
    return Integer(g)


# ---------------------------------------------------------------------------
# Hermite normal form
# ---------------------------------------------------------------------------


def hermite_unimodular(M: ExactMatrix) -> Tuple[ExactMatrix, ExactMatrix]:
    """Column-style Hermite normal form.

    Returns (U, H) with U unimodular and M U = H = [L 0], L lower triangular
    with positive diagonal and 0 <= H[i][j] < H[i][i] left of the diagonal.

    Raises:
        RankDeficiencyError: if M does not have full row rank
    """
    M.require_integral("hermite_unimodular")
    r, n = M.shape
    if r > n:
        raise RankDeficiencyError(f"A {M.shape} matrix cannot have full row rank")

    H = M.to_int_lists()
    U = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def combine(i: int, j: int, s: int, t: int, u: int, v: int) -> None:
        # (col_i, col_j) <- (s col_i + t col_j, u col_i + v col_j)
        for mat in (H, U):
            for row in mat:
                a, b = row[i], row[j]
                row[i], row[j] = s * a + t * b, u * a + v * b

    for i in range(r):
        for j in range(i + 1, n):
            b = H[i][j]
            if b == 0:
                continue
            a = H[i][i]
            x, y, g = extended_gcd(a, b)
            combine(i, j, x, y, -b // g, a // g)
        pivot = H[i][i]
        if pivot == 0:
            raise RankDeficiencyError(f"Row {i} is dependent on the rows above it")
        if pivot < 0:
            for mat in (H, U):
                for row in mat:
                    row[i] = -row[i]
            pivot = -pivot
        for j in range(i):
            q = H[i][j] // pivot
            if q:
                for mat in (H, U):
                    for row in mat:
                        row[j] -= q * row[i]

    logger.debug(f"Hermite form of {M.shape} matrix computed")
    return ExactMatrix(U, cols=n), ExactMatrix(H, cols=n)


# ---------------------------------------------------------------------------
# Total unimodularity
# ---------------------------------------------------------------------------


def is_totally_unimodular(M: ExactMatrix, settings: Optional[Settings] = None) -> bool:
    """True iff every square minor is in {-1, 0, 1} (exhaustive)."""
    M.require_integral("is_totally_unimodular")
    if any(abs(x) > 1 for row in M.row_list() for x in row):
        return False
    M = distinct_rows_up_to_sign(M)
    top = min(M.rows, M.cols)
    _subset_budget(
        sum(comb(M.rows, k) * comb(M.cols, k) for k in range(2, top + 1)),
        "is_totally_unimodular",
        settings,
    )
    for k in range(2, top + 1):
        for rows in combinations(range(M.rows), k):
            block = M.select_rows(rows)
            for cols in combinations(range(M.cols), k):
                if abs(det(block.submatrix(range(k), cols))) > 1:
                    logger.debug(f"Minor rows={rows} cols={cols} exceeds 1")
                    return False
    return True
