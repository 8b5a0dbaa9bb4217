"""Unit tests for instance generators."""

import pytest
from sympy import Rational

from src.core.config import Settings
from src.core.exceptions import ParameterError, ResampleBudgetError, ResourceCapError
from src.lab.exactmath import ExactMatrix, det, is_totally_unimodular
from src.lab.generators import (
    DirectedTree,
    GeneratedInstance,
    InstanceGenerator,
    certify_lower_bound,
    gen_lower_bound,
    gen_random,
    gen_strictly_delta_modular,
)
from src.lab.polyhedron import is_bounded, lattice_points
from src.lab.proximity import measure_proximity


class TestLowerBoundFamily:
    """P_(Δ,n,k) and its certified claims."""

    def test_structure(self):
        inst = gen_lower_bound(5, 3, 1)
        assert inst.beta == (0, 4)
        assert inst.B.row(2) == (0, 4, 5)
        assert inst.rhs == (1, 3, 1)
        assert inst.cutting_rows.row(0) == (1, -5, -5)
        assert inst.x_star == (1, 3, Rational(-11, 5))
        assert inst.A.rows == 2 * 3 + 1
        assert inst.T @ inst.B == inst.A

    def test_certified_proximity(self):
        cert = certify_lower_bound(gen_lower_bound(5, 3, 1))
        assert cert.holds
        assert cert.proximity == 3
        assert cert.claims["proximity = Δ - 2"]
        assert cert.delta_table[1] == 5

    def test_box_lattice_count(self):
        cert = certify_lower_bound(gen_lower_bound(4, 3, 1))
        assert cert.box_lattice_count == 2

    def test_last_k_claims(self):
        inst = gen_lower_bound(4, 3, 2)
        cert = certify_lower_bound(inst)
        assert cert.holds
        assert "every constraint tight on P" in cert.claims
        assert cert.box_lattice_count == 4

    def test_only_lattice_point_is_origin(self):
        inst = gen_lower_bound(6, 3, 1)
        assert lattice_points(inst.polyhedron) == [(0, 0, 0)]

    @pytest.mark.parametrize("delta,n,k", [(4, 3, 1), (5, 3, 2), (4, 4, 2)])
    def test_box_points_match_scan(self, delta, n, k):
        inst = gen_lower_bound(delta, n, k)
        assert inst.box_lattice_points() == lattice_points(inst.box_polyhedron)

    def test_box_points_respect_cap(self):
        with pytest.raises(ResourceCapError):
            gen_lower_bound(6, 3, 1).box_lattice_points(Settings(cap_box=10))

    @pytest.mark.parametrize("delta,n,k", [(4, 3, 1), (5, 3, 1), (4, 3, 2)])
    def test_proximity_matches_measurement(self, delta, n, k):
        inst = gen_lower_bound(delta, n, k)
        assert certify_lower_bound(inst).proximity == measure_proximity(inst.instance).proximity

    @pytest.mark.parametrize("delta,n", [(d, n) for d in range(3, 7) for n in range(2, 6)])
    def test_proximity_grid(self, delta, n):
        cert = certify_lower_bound(gen_lower_bound(delta, n, n - 2))
        assert cert.holds
        assert cert.proximity == delta - 2
        assert cert.delta_table[n - 2] == delta
        assert cert.box_lattice_count == 2 ** (n - 2)

    @pytest.mark.parametrize("delta,n", [(d, n) for d in range(3, 7) for n in range(2, 6)])
    def test_last_k_grid(self, delta, n):
        inst = gen_lower_bound(delta, n, n - 1)
        cert = certify_lower_bound(inst)
        assert cert.holds
        assert cert.proximity == 1
        assert cert.claims["‖b‖∞ = Δ - 1"]
        assert cert.claims["every constraint tight on P"]

    @pytest.mark.parametrize("delta,n,k", [(2, 2, 0), (3, 1, 0), (4, 3, 3), (3, 4, 0)])
    def test_invalid_parameters(self, delta, n, k):
        with pytest.raises(ParameterError):
            gen_lower_bound(delta, n, k)


class TestRandomInstances:
    """Seeded random draws."""

    def test_deterministic(self):
        first = gen_random(2, 4, 3, seed=7)
        second = gen_random(2, 4, 3, seed=7)
        assert first == second

    def test_bounded_and_feasible(self):
        inst = gen_random(3, 5, 2, seed=11)
        assert inst.m in (5, 6)
        assert is_bounded(inst.polyhedron)
        assert lattice_points(inst.polyhedron)

    def test_invalid_parameters(self):
        with pytest.raises(ParameterError):
            gen_random(3, 2, 3, seed=0)

    def test_resample_budget(self):
        settings = Settings(cap_box=1, resample_budget=3)
        with pytest.raises(ResampleBudgetError):
            gen_random(2, 4, 3, seed=0, settings=settings)


class TestStrictlyDeltaModular:
    """A = T B draws."""

    @pytest.mark.parametrize("t_source", ["interval", "network", "auto"])
    @pytest.mark.parametrize("delta", [1, 4, 6])
    def test_factorization(self, delta, t_source):
        inst, T, B = gen_strictly_delta_modular(3, 6, delta, seed=3, t_source=t_source)
        assert T @ B == inst.A
        assert abs(det(B)) == delta
        assert is_totally_unimodular(T)
        assert is_bounded(inst.polyhedron)

    @pytest.mark.parametrize("seed", range(4))
    def test_network_factor(self, seed):
        inst, T, _ = gen_strictly_delta_modular(3, 8, 2, seed=seed, t_source="network")
        assert T.rows == 8
        assert T.row_list()[:6] == ExactMatrix([[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, 0, 0], [0, -1, 0], [0, 0, -1]]).row_list()
        assert all(x in (-1, 0, 1) for row in T.row_list() for x in row)
        assert all(any(row) for row in T.row_list())
        assert is_totally_unimodular(T)
        assert is_bounded(inst.polyhedron)

    def test_auto_is_deterministic(self):
        first = gen_strictly_delta_modular(2, 5, 3, seed=9, t_source="auto")
        second = gen_strictly_delta_modular(2, 5, 3, seed=9, t_source="auto")
        assert first == second

    def test_too_few_rows(self):
        with pytest.raises(ParameterError):
            gen_strictly_delta_modular(3, 3, 2, seed=0)

    def test_network_needs_two_n_rows(self):
        with pytest.raises(ParameterError):
            gen_strictly_delta_modular(3, 5, 2, seed=0, t_source="network")

    def test_unknown_t_source(self):
        with pytest.raises(ParameterError):
            gen_strictly_delta_modular(2, 4, 2, seed=0, t_source="grid")


class TestDirectedTree:
    """Signed path rows of a directed tree."""

    @pytest.fixture
    def tree(self):
        # 0 <- 1 <- 3 and 0 -> 2
        return DirectedTree(parent=(0, 0, 1), upward=(True, False, True))

    def test_path_through_root(self, tree):
        assert tree.path_row(3, 2) == [1, 1, 1]

    def test_path_to_ancestor(self, tree):
        assert tree.path_row(3, 1) == [0, 0, 1]
        assert tree.path_row(1, 3) == [0, 0, -1]

    def test_rows_form_network_matrix(self, tree):
        rows = [tree.path_row(u, v) for u in range(4) for v in range(4) if u != v]
        assert is_totally_unimodular(ExactMatrix(rows, cols=3))


class TestInstanceGenerator:
    """Single draws and batches with history tracking."""

    def test_batch(self):
        generator = InstanceGenerator()
        batch = generator.generate_batch("random", 3, seed_start=10, n=2, m=4, entry_bound=3)
        assert [drawn.seed for drawn in batch] == [10, 11, 12]
        assert all(drawn.witness is None for drawn in batch)
        assert all(drawn.appended_rows in (0, 1) for drawn in batch)
        assert generator.total_generated == 3
        history = generator.generation_history[-1]
        assert history["requested"] == 3
        assert history["generated"] == 3
        assert history["params"] == {"n": 2, "m": 4, "entry_bound": 3}

    def test_sdm_batch_carries_witness(self):
        batch = InstanceGenerator().generate_batch("sdm", 2, n=2, m=4, delta=3)
        for drawn in batch:
            T, B = drawn.witness
            assert T @ B == drawn.instance.A
            assert drawn.params["t_source"] == "auto"

    def test_generate_matches_direct_draw(self):
        drawn = InstanceGenerator().generate("random", 7, n=2, m=4)
        assert isinstance(drawn, GeneratedInstance)
        assert drawn.instance == gen_random(2, 4, 3, seed=7)

    def test_generate_lower_bound(self):
        drawn = InstanceGenerator().generate("lowerbound", delta=5, n=3, k=1)
        assert drawn.seed is None
        assert drawn.lower_bound == gen_lower_bound(5, 3, 1)
        assert drawn.witness == (drawn.lower_bound.T, drawn.lower_bound.B)
        assert drawn.appended_rows == 0
        assert certify_lower_bound(drawn.lower_bound).holds

    def test_batch_rejects_lower_bound(self):
        with pytest.raises(ParameterError):
            InstanceGenerator().generate_batch("lowerbound", 1, delta=5, n=3, k=1)

    def test_missing_parameter(self):
        with pytest.raises(ParameterError, match="delta"):
            InstanceGenerator().generate("sdm", 0, n=2, m=4)

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            InstanceGenerator().generate_batch("lattice", 1, n=2, m=4)
