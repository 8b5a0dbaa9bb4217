"""Unit tests for proximity measurement, normalization and kappa."""

import pytest
from sympy import Rational

from src.core.exceptions import (
    DegenerateObjectiveError,
    DimensionError,
    HypothesisError,
    InfeasibleError,
    IntegralityError,
    RankDeficiencyError,
    UnboundedError,
)
from src.lab.exactmath import ExactMatrix, IndexSet, delta_table
from src.lab.generators import gen_lower_bound, gen_random, gen_strictly_delta_modular
from src.lab.polyhedron import lattice_points
from src.lab.proximity import (
    Instance,
    NormalizedInstance,
    check_factorization,
    check_strictly_delta_modular_bound,
    check_volume_bound,
    default_block_sequence,
    delta_I,
    kappa_d,
    kappa_I,
    kappa_profile,
    lt_rational_plus_sqrt2,
    measure_proximity,
    normalize,
    normalized_width,
    planar_section,
)
from src.models.report import BoundFlag


@pytest.fixture
def lower_bound_2d():
    """P_(3,2,0): x* = (1, -1/3), only lattice point 0."""
    return gen_lower_bound(3, 2, 0)


@pytest.fixture
def wedge():
    """x, y >= 0, 2x + y <= 3 maximizing 2x: x* = (3/2, 0)."""
    return Instance(ExactMatrix([[2, 1], [-1, 0], [0, -1]]), (3, 0, 0), (2, 0))


class TestHelpers:
    """Exact sqrt(2) comparisons and block sequences."""

    def test_sqrt2_comparisons(self):
        assert lt_rational_plus_sqrt2(Rational(1), Rational(0), Rational(1)) is True
        assert lt_rational_plus_sqrt2(Rational(3, 2), Rational(0), Rational(1)) is False
        assert lt_rational_plus_sqrt2(Rational(7, 5), Rational(0), Rational(1)) is True
        assert lt_rational_plus_sqrt2(Rational(-5), Rational(1), Rational(0)) is True

    @pytest.mark.parametrize(
        "d,expected",
        [(1, (1,)), (2, (2,)), (3, (3,)), (4, (2, 2)), (5, (3, 2)), (6, (3, 3)), (7, (3, 2, 2)), (8, (3, 3, 2))],
    )
    def test_block_sequence(self, d, expected):
        assert default_block_sequence(d) == expected
        assert sum(expected) == d


class TestInstance:
    """Validation of (A, b, c)."""

    def test_fractional_rhs(self):
        with pytest.raises(IntegralityError):
            Instance(ExactMatrix([[1, 0], [0, 1]]), ("1/2", 0), (1, 1))

    def test_rank_deficient(self):
        with pytest.raises(RankDeficiencyError):
            Instance(ExactMatrix([[1, 1], [2, 2]]), (1, 1), (1, 0))

    def test_objective_length(self):
        with pytest.raises(DimensionError):
            Instance(ExactMatrix([[1, 0], [0, 1]]), (1, 1), (1,))


class TestDeltaI:
    """Delta_I(A, alpha)."""

    def test_empty_index_set(self):
        A = ExactMatrix([[1, 0], [0, 1], [-1, -1]])
        assert delta_I(A, (1, 0), IndexSet()) == 1

    def test_divides_by_gcd(self):
        A = ExactMatrix([[2, 4, 0], [0, 0, 1], [1, 0, 0]])
        # K = {0, k}; det(alpha; a_0; a_k) / gcd(2, 4, 0)
        assert delta_I(A, (0, 1, 0), IndexSet.of([0])) == 1

    def test_too_many_rows(self):
        A = ExactMatrix([[1, 0], [0, 1]])
        with pytest.raises(DimensionError):
            delta_I(A, (1, 0), IndexSet.of([0, 1]))


class TestMeasureProximity:
    """Measured proximity and every bound flag."""

    def test_lower_bound_example(self, lower_bound_2d):
        report = measure_proximity(lower_bound_2d.instance)
        assert report.proximity == 1
        assert report.witness_vertex == (1, Rational(-1, 3))
        assert report.witness_point == (0, 0)
        assert report.delta_table == [3, 3]
        assert report.bound_main == 3
        assert report.flags["main"] is BoundFlag.STRICT
        assert report.flags["cook"] is BoundFlag.STRICT
        assert report.flags["template"] is BoundFlag.STRICT
        assert report.flags["tu"] is BoundFlag.NOT_APPLICABLE
        assert report.all_hold

    def test_witness_enables_tu_bound(self, lower_bound_2d):
        report = measure_proximity(lower_bound_2d.instance, witness=(lower_bound_2d.T, lower_bound_2d.B))
        assert report.bound_tu == 2
        assert report.flags["tu"] is BoundFlag.STRICT

    def test_unimodular_box(self):
        inst = Instance(ExactMatrix([[1, 0], [0, 1], [-1, 0], [0, -1]]), (2, 3, 0, 0), (1, 1))
        report = measure_proximity(inst)
        assert report.proximity == 0
        assert report.lp_value == report.ip_value == 5

    def test_fractional_vertex(self, wedge):
        report = measure_proximity(wedge)
        assert report.proximity == Rational(1, 2)
        assert report.witness_point == (1, 0)
        assert report.optimal_point_count == 2

    def test_one_dimensional(self):
        inst = Instance(ExactMatrix([[2], [-1]]), (3, 0), (1,))
        report = measure_proximity(inst)
        assert report.proximity == Rational(1, 2)
        assert report.bound_main is None
        assert report.flags["main"] is BoundFlag.NOT_APPLICABLE
        assert report.flags["template"] is BoundFlag.STRICT

    def test_unbounded(self):
        inst = Instance(ExactMatrix([[-1, 0], [0, -1]]), (0, 0), (-1, -1))
        with pytest.raises(UnboundedError):
            measure_proximity(inst)

    def test_no_lattice_points(self):
        inst = Instance(ExactMatrix([[3], [-3]]), (2, -1), (1,))
        with pytest.raises(InfeasibleError):
            measure_proximity(inst)


class TestNormalize:
    """Cut to the optimal cone and move z* to the origin."""

    def test_wedge(self, wedge):
        norm = normalize(wedge)
        assert norm.shift == (1, 0)
        assert norm.optimal_vertex == (Rational(1, 2), 0)
        assert norm.base.m == wedge.m + 2
        assert lattice_points(norm.polyhedron) == [(0, 0)]
        assert normalized_width(norm) == Rational(1, 2)

    def test_lower_bound_is_already_normal(self, lower_bound_2d):
        norm = normalize(lower_bound_2d.instance)
        assert norm.shift == (0, 0)
        assert norm.optimal_vertex == (1, Rational(-1, 3))

    def test_assume_checks_lattice(self, wedge):
        with pytest.raises(HypothesisError):
            NormalizedInstance.assume(wedge)

    def test_degenerate_vertex_uses_dual_feasible_basis(self):
        A = ExactMatrix([[0, 0], [1, 2], [-2, -2], [2, 2], [-1, -1], [2, 0]])
        inst = Instance(A, (0, 4, -1, 3, -1, -2), (2, 1))
        norm = normalize(inst)
        assert norm.basis == IndexSet((1, 5))
        assert norm.shift == (-1, 2)
        assert norm.optimal_vertex == (0, Rational(1, 2))
        assert lattice_points(norm.polyhedron) == [(0, 0)]

    def test_seeded_draw_with_degenerate_optimum(self):
        inst = gen_random(2, 6, 2, seed=1)
        norm = normalize(inst)
        assert lattice_points(norm.polyhedron) == [(0, 0)]
        assert measure_proximity(norm.base).proximity == measure_proximity(inst).proximity

    @pytest.mark.parametrize("seed", range(6))
    def test_delta_table_is_preserved(self, seed):
        inst = gen_random(3, 5, 2, seed=seed)
        norm = normalize(inst)
        assert delta_table(norm.base.A) == delta_table(inst.A)
        assert lattice_points(norm.polyhedron) == [(0, 0, 0)]


class TestKappa:
    """kappa_I and the per-dimension profile."""

    @pytest.fixture
    def norm(self, lower_bound_2d):
        return NormalizedInstance.assume(lower_bound_2d.instance)

    def test_kappa_full_dimension(self, norm):
        assert kappa_I(norm, (1, 0), IndexSet()) == Rational(1, 3)
        assert kappa_I(norm, (0, 1), IndexSet()) == Rational(1, 6)

    def test_degenerate(self, norm):
        with pytest.raises(DegenerateObjectiveError):
            kappa_I(norm, (1, 0), IndexSet.of([0]))

    def test_profile(self, norm):
        profile = kappa_profile(norm, (1, 0))
        assert profile[2] == (Rational(1, 3), IndexSet())
        assert profile[1][0] == Rational(1, 3)
        assert kappa_d(norm, (1, 0), 1) < 1

    @pytest.mark.parametrize("delta,n,k", [(4, 3, 1), (5, 3, 1), (6, 3, 2)])
    def test_small_dimensions_below_limits(self, delta, n, k):
        norm = NormalizedInstance.assume(gen_lower_bound(delta, n, k).instance)
        for alpha in [(1,) + (0,) * (n - 1), (0,) * (n - 1) + (-1,)]:
            profile = kappa_profile(norm, alpha)
            for d in (1, 2):
                if d in profile:
                    assert profile[d][0] < 1
            if 3 in profile:
                assert profile[3][0] ** 2 < 2


class TestVolumeBound:
    """Squared volume inequality and the planar section."""

    def test_planar_instance(self, lower_bound_2d):
        norm = NormalizedInstance.assume(lower_bound_2d.instance)
        check = check_volume_bound(norm, (1, 0))
        assert check.kappa == Rational(1, 3)
        assert check.volume_squared == Rational(4, 9)
        assert check.lhs == Rational(4, 9)
        assert check.rhs == 4
        assert check.holds

    def test_dimension_restricted(self):
        inst = Instance(ExactMatrix([[2], [-1]]), (1, 0), (1,))
        norm = NormalizedInstance.assume(inst)
        with pytest.raises(DimensionError):
            check_volume_bound(norm, (1,))

    def test_planar_section(self):
        norm = NormalizedInstance.assume(gen_lower_bound(5, 3, 1).instance)
        section = planar_section(norm, (1, 0, 0))
        assert section.scaling_holds
        assert section.rotation_contained
        assert section.mahler_product >= 8
        assert section.holds


class TestStrictlyDeltaModular:
    """A = T B hypotheses and the resulting bound."""

    def test_lower_bound_family(self, lower_bound_2d):
        assert check_strictly_delta_modular_bound(lower_bound_2d.instance, lower_bound_2d.T, lower_bound_2d.B)

    def test_singular_factor(self):
        A = ExactMatrix([[1, 2], [2, 4]])
        with pytest.raises(HypothesisError) as exc:
            check_factorization(A, ExactMatrix.identity(2), A)
        assert exc.value.hypothesis == "B invertible"

    def test_non_tu_factor(self):
        T = ExactMatrix([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
        B = ExactMatrix.identity(3)
        with pytest.raises(HypothesisError) as exc:
            check_factorization(T, T, B)
        assert exc.value.hypothesis == "T totally unimodular"

    def test_product_mismatch(self):
        with pytest.raises(HypothesisError) as exc:
            check_factorization(ExactMatrix([[2, 0], [0, 1]]), ExactMatrix.identity(2), ExactMatrix.identity(2))
        assert exc.value.hypothesis == "A = T B"


class TestSeededInstances:
    """Bounds on seeded random and strictly Δ-modular draws."""

    @pytest.mark.parametrize("n,m,seed", [(2, 4, s) for s in range(5)] + [(3, 5, s) for s in range(5)])
    def test_main_bound(self, n, m, seed):
        report = measure_proximity(gen_random(n, m, 2, seed=seed))
        assert report.flags["main"].holds
        assert report.proximity <= Rational(n, 2) * report.delta_table[n - 2]

    @pytest.mark.parametrize("seed", range(5))
    def test_kappa_limits(self, seed):
        norm = normalize(gen_random(3, 5, 2, seed=seed))
        for alpha in [(1, 0, 0), (0, -1, 0), (1, 1, 0)]:
            for d, (value, _) in kappa_profile(norm, alpha).items():
                if d in (1, 2):
                    assert value < 1
                elif d == 3:
                    assert value**2 < 2

    @pytest.mark.parametrize("seed", range(5))
    def test_totally_unimodular_factor_bound(self, seed):
        inst, T, B = gen_strictly_delta_modular(2, 4, 3, seed=seed)
        report = measure_proximity(inst, witness=(T, B))
        top = max(report.delta_table[0], report.delta_table[1])
        assert report.bound_tu == top - 1
        assert report.flags["tu"].holds
        assert report.proximity <= report.bound_tu
