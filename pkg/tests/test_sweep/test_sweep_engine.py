"""Tests for sweep specs, point evaluation, scheduling and checkpoints"""

import json
import math

import pytest

from src.config.config_manager import RunConfig
from src.errors import ConfigurationError, GridSizeError
from src.sweep.sweep_engine import (
    FLAG_COLUMNS,
    SweepAxis,
    SweepRecord,
    SweepSpec,
    apply_axis,
    checkpoint_header,
    config_at,
    evaluate_point,
    records_to_rows,
    run_sweep,
)


CHIS = (0.0, math.pi / 4, math.pi / 2)


def _rows(records):
    return records_to_rows(records, deterministic=True)


class TestSweepSpec:
    """Test grid construction"""

    def test_unknown_axis(self):
        """Only known parameters can be swept"""
        with pytest.raises(ConfigurationError):
            SweepAxis("temperature", (1.0,))

    def test_empty_axis(self):
        """An axis needs at least one value"""
        with pytest.raises(ConfigurationError):
            SweepAxis("chi", ())

    def test_duplicate_axes(self):
        """The same axis may not appear twice"""
        with pytest.raises(ConfigurationError):
            SweepSpec([SweepAxis("chi", (0.0,)), SweepAxis("chi", (1.0,))])

    def test_unknown_output(self):
        """Outputs are limited to the pipeline results"""
        with pytest.raises(ConfigurationError):
            SweepSpec([SweepAxis("chi", (0.0,))], outputs=("M_X",))

    def test_row_major_order(self):
        """The last axis varies fastest"""
        spec = SweepSpec([SweepAxis("k_f", (1.0, 2.0)), SweepAxis("chi", (0.0, 0.5, 1.0))])
        points = spec.points()
        assert spec.size == 6
        assert points[0] == {"k_f": 1.0, "chi": 0.0}
        assert points[1] == {"k_f": 1.0, "chi": 0.5}
        assert points[3] == {"k_f": 2.0, "chi": 0.0}


class TestApplyAxis:
    """Test per-point configuration overrides"""

    def test_nested_target(self):
        """Field angles land in the field section"""
        config = apply_axis(RunConfig(), "theta", 1.2)
        assert config.magnetic_field.theta == 1.2

    def test_base_untouched(self):
        """Overrides work on a copy"""
        base = RunConfig()
        apply_axis(base, "k_r", 5.0)
        assert base.rates.k_r == 1e8

    def test_dipolar_value_clears_distance(self):
        """Sweeping D drops a configured distance"""
        base = RunConfig()
        base.coupling.r_nm = 2.0
        config = apply_axis(base, "d_mt", 0.3)
        assert config.coupling.r_nm is None
        assert config.coupling.resolved_d_mt == 0.3

    def test_config_at(self):
        """Several coordinates apply in order"""
        config = config_at(RunConfig(), {"chi": 0.5, "k_dec": 1e5})
        assert config.chi == 0.5
        assert config.rates.k_dec == 1e5


class TestEvaluatePoint:
    """Test the single-point pipeline"""

    def test_outputs_and_flags(self, fast_config, toy_1n1n):
        """A point reports finite outputs and a reached horizon"""
        fast_config.chi = 0.6
        record = evaluate_point(fast_config, toy_1n1n)
        assert record.ok
        assert record.M_G > 0 and record.M_L > 0
        assert record.phi_F + record.phi_R == pytest.approx(1.0, abs=5e-3)
        assert record.horizon_reached
        assert record.yield_conserved
        assert record.engine == "eigenbasis"
        assert not record.fell_back

    @pytest.mark.parametrize("chi", [0.0, math.pi / 4, math.pi / 2])
    def test_rk4_without_decoherence(self, chi, fast_config, toy_1n1n):
        """RK4 at the default step handles the rank-deficient start and matches the eigenbasis engine"""
        fast_config.chi = chi
        fast_config.magnetic_field.theta = 0.0
        reference = evaluate_point(fast_config, toy_1n1n)

        fast_config.integrator.engine = "runge_kutta_4"
        record = evaluate_point(fast_config, toy_1n1n)
        assert record.ok, record.error
        assert record.engine == "runge_kutta_4"
        assert record.M_G == pytest.approx(reference.M_G, rel=1e-2)
        assert record.phi_F == pytest.approx(reference.phi_F, abs=1e-3)

    def test_invalid_config(self, fast_config, toy_1n1n):
        """Invalid parameters are raised, not recorded"""
        fast_config.chi = 2.0
        with pytest.raises(ConfigurationError):
            evaluate_point(fast_config, toy_1n1n)


class TestRunSweep:
    """Test scheduling, ordering and failure handling"""

    def test_single_point_matches_direct_call(self, fast_config, toy_1n1n):
        """A one-point sweep equals evaluate_point bit for bit"""
        spec = SweepSpec([SweepAxis("chi", (0.7,))], fast_config)
        [record] = run_sweep(spec, toy_1n1n)
        fast_config.chi = 0.7
        direct = evaluate_point(fast_config, toy_1n1n, coordinates={"chi": 0.7})
        assert _rows([record]) == _rows([direct])

    def test_serial_matches_parallel(self, fast_config, toy_1n1n):
        """Thread count does not change results or their order"""
        spec = SweepSpec([SweepAxis("chi", CHIS), SweepAxis("d_mt", (0.0, -0.2))], fast_config)
        serial = run_sweep(spec, toy_1n1n, workers=1)
        parallel = run_sweep(spec, toy_1n1n, workers=3)
        assert [r.index for r in parallel] == list(range(6))
        for a, b in zip(serial, parallel):
            assert a.coordinates == b.coordinates
            assert a.M_G == pytest.approx(b.M_G, rel=1e-12)
            assert a.phi_F == pytest.approx(b.phi_F, rel=1e-12)

    def test_chi_trend_on_default_grid(self, fast_config, toy_1n1n):
        """Five chi values give five records in grid order"""
        grid = (0.0, math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2)
        records = run_sweep(SweepSpec([SweepAxis("chi", grid)], fast_config), toy_1n1n)
        assert [r.coordinates["chi"] for r in records] == list(grid)
        assert all(r.ok for r in records)

    def test_orientations_without_recombination(self, fast_config, toy_2n2n):
        """k_R = 0: phi_F = 1 at every orientation"""
        fast_config.rates.k_r = 0.0
        fast_config.chi = 0.4
        spec = SweepSpec([SweepAxis("theta", (0.3, 1.9)), SweepAxis("phi", (0.0, 2.5))], fast_config)
        for record in run_sweep(spec, toy_2n2n, workers=2):
            assert record.phi_F == pytest.approx(1.0, abs=1e-4)

    def test_failed_point_recorded(self, fast_config, toy_1n1n):
        """An invalid point becomes an error record; the rest still run"""
        spec = SweepSpec([SweepAxis("chi", (0.0, 2.0, 1.0))], fast_config)
        records = run_sweep(spec, toy_1n1n)
        assert [r.status for r in records] == ["ok", "error", "ok"]
        assert "ConfigurationError" in records[1].error
        assert math.isnan(records[1].M_G)

    def test_grid_cap(self, fast_config, toy_1n1n):
        """Grids above max_points are refused before any work"""
        fast_config.sweep.max_points = 3
        spec = SweepSpec([SweepAxis("chi", (0.0, 0.1)), SweepAxis("phi", (0.0, 1.0))], fast_config)
        with pytest.raises(GridSizeError):
            run_sweep(spec, toy_1n1n)

    def test_rows_have_flag_columns(self, fast_config, toy_1n1n):
        """Rows list axes, outputs, tails and flags; wall time only when not deterministic"""
        spec = SweepSpec([SweepAxis("chi", (0.2,))], fast_config)
        records = run_sweep(spec, toy_1n1n)
        row = _rows(records)[0]
        assert list(row)[:5] == ["chi", "M_G", "M_L", "phi_F", "phi_R"]
        for name in FLAG_COLUMNS:
            assert name in row
        assert "wall_time_s" not in row
        assert "wall_time_s" in records_to_rows(records, deterministic=False)[0]


class TestCheckpoint:
    """Test JSON-lines checkpointing and resume"""

    def test_resume_skips_finished_points(self, fast_config, toy_1n1n, temp_dir):
        """A truncated checkpoint is resumed and gives the same rows"""
        checkpoint = temp_dir / "sweep.jsonl"
        spec = SweepSpec([SweepAxis("chi", CHIS)], fast_config)
        full = run_sweep(spec, toy_1n1n, checkpoint_path=checkpoint)

        lines = checkpoint.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 4
        assert json.loads(lines[0]) == checkpoint_header(spec, toy_1n1n)
        # Keep one finished point and a partially written second one
        checkpoint.write_text("\n".join(lines[:2]) + "\n" + lines[2][:20], encoding="utf-8")

        resumed = run_sweep(spec, toy_1n1n, checkpoint_path=checkpoint)
        assert _rows(resumed) == _rows(full)

    def test_scheduling_change_resumes(self, fast_config, toy_1n1n, temp_dir):
        """Worker count and output directory do not invalidate a checkpoint"""
        checkpoint = temp_dir / "sweep.jsonl"
        run_sweep(SweepSpec([SweepAxis("chi", CHIS)], fast_config), toy_1n1n, checkpoint_path=checkpoint)
        fast_config.sweep.workers = 3
        fast_config.output_dir = str(temp_dir / "elsewhere")
        records = run_sweep(SweepSpec([SweepAxis("chi", CHIS)], fast_config), toy_1n1n, checkpoint_path=checkpoint)
        assert all(record.ok for record in records)

    def test_record_json_round_trip(self):
        """Records survive the checkpoint encoding"""
        record = SweepRecord(
            index=4, coordinates={"chi": 0.5}, M_G=1.5e-7, M_L=9.1e-8, phi_F=0.25, phi_R=0.75,
            M_G_tail=1e-12, M_L_tail=2e-12, yield_tail=1e-6, horizon_reached=True, engine="eigenbasis",
        )
        assert SweepRecord.from_json(record.to_json()) == record

    def test_mismatched_checkpoint(self, fast_config, toy_1n1n, temp_dir):
        """A checkpoint from a different grid is refused"""
        checkpoint = temp_dir / "sweep.jsonl"
        run_sweep(SweepSpec([SweepAxis("chi", (0.0, 0.1))], fast_config), toy_1n1n, checkpoint_path=checkpoint)
        with pytest.raises(ConfigurationError):
            run_sweep(SweepSpec([SweepAxis("chi", (0.3, 0.4))], fast_config), toy_1n1n, checkpoint_path=checkpoint)

    def test_changed_rates_refused(self, fast_config, toy_1n1n, temp_dir):
        """The same grid with another base configuration does not reuse stale records"""
        checkpoint = temp_dir / "sweep.jsonl"
        run_sweep(SweepSpec([SweepAxis("chi", CHIS)], fast_config), toy_1n1n, checkpoint_path=checkpoint)
        fast_config.rates.k_f = 2e7
        with pytest.raises(ConfigurationError, match="different configuration"):
            run_sweep(SweepSpec([SweepAxis("chi", CHIS)], fast_config), toy_1n1n, checkpoint_path=checkpoint)

    def test_changed_system_refused(self, fast_config, toy_1n1n, one_nucleus, temp_dir):
        """A checkpoint of one spin system is not resumed for another"""
        checkpoint = temp_dir / "sweep.jsonl"
        spec = SweepSpec([SweepAxis("chi", (0.0,))], fast_config)
        run_sweep(spec, toy_1n1n, checkpoint_path=checkpoint)
        with pytest.raises(ConfigurationError):
            run_sweep(spec, one_nucleus, checkpoint_path=checkpoint)

    def test_headerless_file_refused(self, fast_config, toy_1n1n, temp_dir):
        """A file without the header line is not trusted"""
        checkpoint = temp_dir / "sweep.jsonl"
        record = SweepRecord(index=0, coordinates={"chi": 0.0}, M_G=1.0)
        checkpoint.write_text(record.to_json() + "\n", encoding="utf-8")
        with pytest.raises(ConfigurationError, match="header"):
            run_sweep(SweepSpec([SweepAxis("chi", (0.0,))], fast_config), toy_1n1n, checkpoint_path=checkpoint)
