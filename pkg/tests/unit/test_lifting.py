"""Unit tests for lifting slices to full-dimensional instances."""

from dataclasses import replace

import pytest
from sympy import Rational

from src.core.exceptions import DimensionError, HypothesisError, IntegralityError, LiftDefectError
from src.lab.exactmath import ExactMatrix, IndexSet, det
from src.lab.generators import gen_lower_bound, gen_random
from src.lab.lifting import lift, verify_lift
from src.lab.proximity import Instance, NormalizedInstance, kappa_I, kappa_profile, normalize


@pytest.fixture
def norm():
    return NormalizedInstance.assume(gen_lower_bound(3, 2, 0).instance)


class TestLift:
    """Coordinates, transported objective and kappa."""

    def test_one_row(self, norm):
        lifted = lift(norm, (1, 0), IndexSet((1,)))
        assert lifted.d == 1
        assert abs(det(lifted.U)) == 1
        assert lifted.complement.members == (0, 2, 3)
        assert lifted.row_order == (1, 0, 2, 3)
        assert lifted.b_hat == (1, 0, 0)
        assert lifted.A_hat.column(0) in {(3, -3, 0), (-3, 3, 0)}
        assert abs(lifted.alpha_hat[0]) == 3
        assert lifted.kappa() == Rational(1, 3)
        assert verify_lift(norm, lifted)

    def test_maps_round_trip(self, norm):
        lifted = lift(norm, (1, 0), IndexSet((1,)))
        x = (1, Rational(-2, 3))
        y = lifted.iso_map(x)
        assert len(y) == 1
        assert lifted.inverse_map(y) == x

    def test_empty_index_set_is_identity(self, norm):
        lifted = lift(norm, (0, 1), IndexSet())
        assert lifted.U == ExactMatrix.identity(2)
        assert lifted.A_hat == norm.base.A
        assert lifted.kappa() == kappa_I(norm, (0, 1), IndexSet())
        assert verify_lift(norm, lifted)

    @pytest.mark.parametrize("delta,k", [(4, 1), (5, 1), (6, 2)])
    def test_profile_slices_lift(self, delta, k):
        norm = NormalizedInstance.assume(gen_lower_bound(delta, 3, k).instance)
        profile = kappa_profile(norm, (1, 0, 0))
        checked = 0
        for d, (value, rows) in profile.items():
            if len(rows) != 3 - d:
                continue
            lifted = lift(norm, (1, 0, 0), rows)
            assert verify_lift(norm, lifted)
            assert lifted.kappa() == value
            checked += 1
        assert checked >= 1

    def test_seeded_slices_lift(self):
        checked = 0
        for seed in range(6):
            norm = normalize(gen_random(3, 5, 2, seed=seed))
            for i in range(3):
                alpha = tuple(1 if j == i else 0 for j in range(3))
                for d, (value, rows) in kappa_profile(norm, alpha).items():
                    if d < 1 or len(rows) != 3 - d:
                        continue
                    lifted = lift(norm, alpha, rows)
                    assert lifted.d == d
                    assert verify_lift(norm, lifted)
                    assert lifted.kappa() == value
                    checked += 1
        assert checked >= 6


class TestLiftErrors:
    """Rejected inputs and detected defects."""

    def test_no_dimensions_left(self, norm):
        with pytest.raises(DimensionError):
            lift(norm, (1, 0), IndexSet((0, 1)))

    def test_fractional_objective(self, norm):
        with pytest.raises(IntegralityError):
            lift(norm, (Rational(1, 2), 0), IndexSet())

    def test_slice_smaller_than_kernel(self):
        wedge = Instance(ExactMatrix([[2, 1], [-1, 0], [0, -1]]), (3, 0, 0), (2, 0))
        with pytest.raises(HypothesisError) as exc:
            lift(normalize(wedge), (1, 0), IndexSet())
        assert exc.value.hypothesis == "span P_I = ker A_I"

    def test_non_unimodular_transform(self, norm):
        lifted = replace(lift(norm, (1, 0), IndexSet()), U=ExactMatrix([[2, 0], [0, 1]]))
        with pytest.raises(LiftDefectError) as exc:
            verify_lift(norm, lifted)
        assert exc.value.identity == "U unimodular"

    def test_broken_objective_transport(self, norm):
        lifted = replace(lift(norm, (1, 0), IndexSet()), alpha_hat=(0, 1))
        with pytest.raises(LiftDefectError) as exc:
            verify_lift(norm, lifted)
        assert exc.value.identity == "objective transport"
