"""Unit tests for cones, spindles, the basis path and template walks."""

from dataclasses import replace

import numpy as np
import pytest
from sympy import Rational

from src.core.exceptions import CertificationError, HypothesisError, ParameterError
from src.lab.exactmath import ExactMatrix, IndexSet
from src.lab.generators import gen_lower_bound, gen_random, gen_strictly_delta_modular
from src.lab.polyhedron import lp_max
from src.lab.proximity import NormalizedInstance, normalize
from src.lab.spindle import (
    SpindleRep,
    build_cone,
    build_spindle,
    certify_walk,
    cone_rays,
    face_path,
    face_path_candidates,
    ray_decomposition,
    ray_norm_bound,
    template_walk,
)

APEX = (1, Rational(-1, 3))


@pytest.fixture
def lower_bound_2d():
    return gen_lower_bound(3, 2, 0)


@pytest.fixture
def spindle(lower_bound_2d):
    return build_spindle(lower_bound_2d.A, APEX, b=lower_bound_2d.b)


class TestSpindle:
    """S(A, x*) as a tagged system."""

    def test_rows_are_tagged(self, spindle):
        assert spindle.sign_vector == (1, 1, -1, -1)
        assert spindle.support == (0, 1, 2, 3)
        assert spindle.null_rows == ()
        assert spindle.zero_copy.members == (0, 1, 2, 3)
        assert spindle.apex_copy.members == (4, 5, 6, 7)
        assert spindle.source_row(6) == 2

    def test_vertices(self, spindle):
        assert set(spindle.vertices()) == {
            (0, 0),
            (0, Rational(1, 3)),
            (1, Rational(-2, 3)),
            APEX,
        }
        assert spindle.dimension == 2

    def test_central_symmetry(self, spindle):
        assert spindle.is_centrally_symmetric()
        assert spindle.mirror((0, Rational(1, 3))) == (1, Rational(-2, 3))

    def test_inner_spindle_is_contained(self, lower_bound_2d, spindle):
        inner = build_spindle(lower_bound_2d.A, (1, Rational(-2, 3)))
        assert inner.dimension == 1
        assert inner.null_rows == (1, 3)
        assert spindle.contains_spindle(inner)

    def test_cone(self, lower_bound_2d):
        cone = build_cone(lower_bound_2d.A, APEX)
        assert cone.contains((0, 5))
        assert cone.contains((3, -2))
        assert not cone.contains((1, -1))

    @pytest.mark.parametrize("seed", range(8))
    def test_random_spindles_are_centrally_symmetric(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 4))
        A = ExactMatrix(rng.integers(-3, 4, size=(n + 2, n)).tolist(), cols=n)
        if A.rank() < n:
            pytest.skip("rank deficient draw")
        apex = tuple(Rational(int(v), int(rng.integers(1, 4))) for v in rng.integers(-4, 5, size=n))
        S = build_spindle(A, apex)
        assert S.is_centrally_symmetric()
        assert all(S.contains(S.mirror(v)) for v in S.vertices())


class TestRays:
    """Primitive cone rays in the lattice B^-1 Z^n."""

    def test_integral_rays(self, lower_bound_2d):
        assert cone_rays(lower_bound_2d.A, APEX) == [(0, 1), (3, -2)]

    def test_lattice_rays(self, lower_bound_2d):
        rays = cone_rays(lower_bound_2d.A, APEX, lower_bound_2d.B)
        assert rays == [(0, Rational(1, 3)), (1, Rational(-2, 3))]
        assert ray_norm_bound(lower_bound_2d.A, lower_bound_2d.B) == 1

    def test_decomposition(self, lower_bound_2d):
        result = ray_decomposition(lower_bound_2d.A, lower_bound_2d.T, lower_bound_2d.B, APEX)
        assert result.terms == [((0, Rational(1, 3)), 1), ((1, Rational(-2, 3)), 1)]
        assert result.length == 2
        assert result.lattice_index == 3
        assert result.length <= result.lattice_index - 1
        assert result.chain == [(0, 0), (0, Rational(1, 3)), APEX]
        assert result.norms_within_bound
        assert result.partial_sums_in_spindle
        assert result.points_distinct
        assert result.residues_distinct
        assert result.cone_rays == [(0, Rational(1, 3)), (1, Rational(-2, 3))]
        assert result.cone_rays_within_bound

    def test_apex_outside_lattice(self, lower_bound_2d):
        with pytest.raises(HypothesisError) as exc:
            ray_decomposition(lower_bound_2d.A, lower_bound_2d.T, lower_bound_2d.B, (Rational(1, 2), 0))
        assert exc.value.hypothesis == "x* ∈ B^-1 Z^n"

    def test_bad_factorization(self, lower_bound_2d):
        with pytest.raises(HypothesisError):
            ray_decomposition(lower_bound_2d.A, ExactMatrix.identity(2), lower_bound_2d.B, APEX)

    @pytest.mark.parametrize("seed", range(6))
    def test_strictly_delta_modular_draws(self, seed):
        inst, T, B = gen_strictly_delta_modular(2, 4, 4, seed=seed)
        norm = normalize(inst)
        T_bar = T.vstack(-T.select_rows(norm.basis))
        result = ray_decomposition(norm.base.A, T_bar, B, norm.optimal_vertex)
        assert result.length <= result.lattice_index - 1
        assert result.norms_within_bound
        assert result.cone_rays_within_bound
        assert result.partial_sums_in_spindle
        assert result.residues_distinct


class TestFacePath:
    """Bland pivots from 0 towards the apex."""

    def test_stops_with_one_apex_row(self, spindle):
        path = face_path(spindle, 1)
        assert path.vertex == (1, Rational(-2, 3))
        assert path.F.rows == IndexSet((4,))
        assert path.F.dimension == 1
        assert path.G.rows == IndexSet((1,))
        assert path.G.dimension == 1
        assert path.F.contains(spindle, path.vertex)

    def test_full_block_stays_at_origin(self, spindle):
        path = face_path(spindle, 2)
        assert path.vertex == (0, 0)
        assert path.F.dimension == 2
        assert path.G.dimension == 0

    def test_block_out_of_range(self, spindle):
        with pytest.raises(ParameterError):
            face_path(spindle, 3)

    def test_candidates(self, spindle):
        assert sorted(face_path_candidates(spindle, 1)) == [(0, Rational(1, 3)), (1, Rational(-2, 3))]


class TestTemplateWalk:
    """Telescoping walks certified against slice maxima."""

    @pytest.fixture
    def norm(self, lower_bound_2d):
        return NormalizedInstance.assume(lower_bound_2d.instance)

    def test_single_block(self, norm):
        # ties for max x break towards the lexicographically smaller vertex
        trace = template_walk(norm, (1, 0))
        assert trace.d_seq == (2,)
        assert trace.points == [(1, Rational(-2, 3)), (0, 0)]
        assert trace.base_delta == 3
        assert trace.total == 1
        assert trace.index_sets == [IndexSet((1,))]
        assert trace.steps[0].kappa == Rational(1, 3)
        assert trace.template_bound_holds() is True

    def test_unit_blocks(self, norm):
        trace = template_walk(norm, (1, 1), d_seq=(1, 1))
        assert trace.points == [APEX, (0, Rational(1, 3)), (0, 0)]
        assert [s.step_value for s in trace.steps] == [Rational(1, 3), Rational(1, 3)]
        assert trace.index_sets == [IndexSet((1,)), IndexSet((0,))]
        assert trace.bound_terms == [Rational(1, 3), Rational(1, 3)]
        assert trace.total == lp_max(norm.polyhedron, (1, 1))[0]
        assert trace.kappa_bound == Rational(2, 3)
        assert trace.template_bound_holds() is True

    @pytest.mark.parametrize("d_seq", [(1,), (3,), (0, 2)])
    def test_bad_blocks(self, norm, d_seq):
        with pytest.raises(ParameterError):
            template_walk(norm, (1, 0), d_seq=d_seq)

    @pytest.mark.parametrize("alpha", [(1, 0, 0), (0, 1, 0), (-1, 0, 0)])
    def test_three_dimensional_walk_is_certified(self, alpha):
        norm = NormalizedInstance.assume(gen_lower_bound(5, 3, 1).instance)
        value = lp_max(norm.polyhedron, alpha)[0]
        if value <= 0:
            pytest.skip("origin already maximizes alpha")
        trace = template_walk(norm, alpha)
        assert trace.total == value
        assert all(s.step_value <= s.slice_max for s in trace.steps)
        assert trace.template_bound_holds() is True

    def test_nested_spindles_are_enforced(self, norm, monkeypatch):
        monkeypatch.setattr(SpindleRep, "contains_spindle", lambda self, other, settings=None: False)
        with pytest.raises(CertificationError) as exc:
            template_walk(norm, (1, 1), d_seq=(1, 1))
        assert exc.value.claim == "nested spindles"

    @pytest.mark.parametrize("n,m,seed", [(2, 4, s) for s in range(6)] + [(3, 5, s) for s in range(3)])
    def test_seeded_walks_are_certified(self, n, m, seed):
        norm = normalize(gen_random(n, m, 2, seed=seed))
        for i in range(n):
            for sign in (1, -1):
                alpha = tuple(sign if j == i else 0 for j in range(n))
                value = lp_max(norm.polyhedron, alpha)[0]
                if value <= 0:
                    continue
                trace = template_walk(norm, alpha)
                assert trace.total == value
                assert all(s.slice_dimension <= s.block for s in trace.steps)
                certify_walk(trace, trace.points[0])


class TestCertifyWalk:
    """Rejection of traces that break the block sequence."""

    @pytest.fixture
    def trace(self, lower_bound_2d):
        return template_walk(NormalizedInstance.assume(lower_bound_2d.instance), (1, 1), d_seq=(1, 1))

    def test_valid_trace(self, trace):
        certify_walk(trace, APEX)
        assert [s.slice_dimension for s in trace.steps] == [1, 1]

    def test_more_steps_than_blocks(self, trace):
        with pytest.raises(CertificationError) as exc:
            certify_walk(replace(trace, d_seq=(2,)), APEX)
        assert exc.value.claim == "steps <= blocks"

    def test_slice_larger_than_block(self, trace):
        first = trace.steps[0]
        broken = replace(trace, steps=[replace(first, slice_dimension=first.block + 1)] + trace.steps[1:])
        with pytest.raises(CertificationError) as exc:
            certify_walk(broken, APEX)
        assert exc.value.claim == "slice dimension <= block"

    def test_wrong_total(self, trace):
        with pytest.raises(CertificationError) as exc:
            certify_walk(trace, (1, 0))
        assert exc.value.claim == "telescoping sum"
