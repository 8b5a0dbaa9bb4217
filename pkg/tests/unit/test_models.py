"""
Unit tests for file models and codecs
"""

import pytest
from pydantic import ValidationError

from src.core.exceptions import InstanceFormatError
from src.lab.exactmath import ExactMatrix
from src.lab.generators import gen_lower_bound
from src.lab.proximity import Instance, measure_proximity, normalize
from src.lab.spindle import template_walk
from src.models.instance import InstanceFile, check_rational_string
from src.models.report import BoundFlag, ReportRecord
from src.models.sweep import SweepAggregate, SweepConfig, SweepGrid
from src.utils.codec import file_to_instance, instance_to_file, report_to_record, walk_to_summary


@pytest.fixture
def sample_file():
    """A 2x1 instance file"""
    return {"A": [[2], [-1]], "b": [3, 0], "c": ["1"]}


class TestInstanceFile:
    """Test instance file validation"""

    def test_minimal(self, sample_file):
        data = InstanceFile.model_validate(sample_file)
        assert data.m == 2
        assert data.n == 1
        assert not data.has_witness
        assert data.schema_version == 1

    def test_int_objective_normalized(self, sample_file):
        sample_file["c"] = [3]
        assert InstanceFile.model_validate(sample_file).c == ["3"]

    @pytest.mark.parametrize("bad", ["1/0", "x", "1.5", True])
    def test_bad_rational(self, bad):
        with pytest.raises(ValueError):
            check_rational_string(bad)

    def test_ragged_matrix(self, sample_file):
        sample_file["A"] = [[2, 1], [-1]]
        with pytest.raises(ValidationError):
            InstanceFile.model_validate(sample_file)

    def test_rhs_length(self, sample_file):
        sample_file["b"] = [3]
        with pytest.raises(ValidationError):
            InstanceFile.model_validate(sample_file)

    def test_witness_needs_both_factors(self, sample_file):
        sample_file["T"] = [[1], [-1]]
        with pytest.raises(ValidationError):
            InstanceFile.model_validate(sample_file)

    def test_witness_shapes(self, sample_file):
        sample_file["T"] = [[1], [-1]]
        sample_file["B"] = [[2, 0]]
        with pytest.raises(ValidationError):
            InstanceFile.model_validate(sample_file)


class TestCodec:
    """Test conversions between lab objects and file models"""

    def test_instance_with_witness(self):
        lb = gen_lower_bound(3, 2, 0)
        data = instance_to_file(lb.instance, witness=(lb.T, lb.B), x_star=lb.x_star)
        assert data.x_star == ["1", "-1/3"]
        assert data.c == ["3", "3"]
        inst, witness = file_to_instance(data)
        assert inst == lb.instance
        assert witness[0] == lb.T
        assert witness[1] == lb.B

    def test_future_schema_rejected(self, sample_file):
        sample_file["schema_version"] = 99
        with pytest.raises(InstanceFormatError):
            file_to_instance(InstanceFile.model_validate(sample_file))

    def test_report_record(self):
        lb = gen_lower_bound(3, 2, 0)
        record = report_to_record(measure_proximity(lb.instance), "lb-d3-n2-k0", lb.instance)
        assert record.proximity == "1"
        assert record.witness_vertex == ["1", "-1/3"]
        assert record.witness_point == [0, 0]
        assert record.delta_table == ["3", "3"]
        assert record.bounds["main"] == "3"
        assert record.bounds["tu"] is None
        assert record.bounds["template"] == "3*(0*sqrt(2) + 1)"
        assert record.flags["main"] is BoundFlag.STRICT
        assert record.all_hold

    def test_record_json_round_trip(self):
        lb = gen_lower_bound(3, 2, 0)
        record = report_to_record(measure_proximity(lb.instance), "lb", lb.instance)
        again = ReportRecord.model_validate_json(record.model_dump_json())
        assert again.flags == record.flags
        assert again.checks == record.checks

    def test_check_errors_round_trip(self):
        record = ReportRecord(instance_id="x", n=2, m=4, checks={"lift": False}, check_errors={"lift": "ResourceCapError: cap"})
        again = ReportRecord.model_validate_json(record.model_dump_json())
        assert again.check_errors == {"lift": "ResourceCapError: cap"}
        assert not again.all_hold

    def test_walk_summary(self):
        wedge = Instance(ExactMatrix([[2, 1], [-1, 0], [0, -1]]), (3, 0, 0), (2, 0))
        trace = template_walk(normalize(wedge), (1, 0))
        summary = walk_to_summary(trace)
        assert summary.d_seq == [1]
        assert summary.points == [["1/2", "0"], ["0", "0"]]
        assert summary.total == "1/2"
        assert summary.steps == 1


class TestSweepModels:
    """Test sweep configuration models"""

    def test_defaults_run_every_check(self):
        config = SweepConfig()
        assert "mahler" in config.checks
        assert config.grids == []

    def test_unknown_check(self):
        with pytest.raises(ValidationError):
            SweepConfig(checks=["proximity", "speed"])

    def test_grid_values_positive(self):
        with pytest.raises(ValidationError):
            SweepGrid(kind="random", n=[0], m=[4])

    def test_unknown_kind(self):
        with pytest.raises(ValidationError):
            SweepGrid(kind="lattice")

    def test_unknown_t_source(self):
        assert SweepGrid(kind="sdm").t_source == "auto"
        with pytest.raises(ValidationError):
            SweepGrid(kind="sdm", t_source="grid")

    def test_aggregate_passed(self):
        assert SweepAggregate(name="s").passed
        assert not SweepAggregate(name="s", violations=[{"instance_id": "x", "check": "walk"}]).passed
        assert not SweepAggregate(name="s", failures=1).passed

    def test_bound_flag_holds(self):
        assert BoundFlag.TIGHT.holds
        assert BoundFlag.NOT_APPLICABLE.holds
        assert not BoundFlag.VIOLATED.holds
