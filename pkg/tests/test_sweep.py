import numpy as np
import pytest

from ramantwa import (
    RampSchedule,
    RunProtocol,
    Scenario,
    compare_effective,
    resonance_lines,
    run_sweep,
)
from ramantwa.config import build_scenario, load_preset

from conftest import make_spec


TINY_RAMP = RampSchedule(t_ramp=20.0, t_settle=10.0, t_window=120.0, sample_stride=2.0)
TINY_GRID = np.array([0.4, 0.5, 0.6])


def tiny_protocol(seed=91):
    return RunProtocol(n_trajectories=128, master_seed=seed, ramp=TINY_RAMP, dt=0.005)


@pytest.fixture(scope="module")
def tiny_sweep():
    scenario = Scenario("flatflat", make_spec())
    return run_sweep(scenario, TINY_GRID, tiny_protocol())


class TestResonanceLines:
    def test_flatflat_single_line(self):
        scenario = Scenario("flatflat", make_spec())
        lines = resonance_lines(scenario, scenario.template.grid)
        assert len(lines) == 1
        assert lines[0].kind == "resonance"
        assert lines[0].omega0c == pytest.approx(0.5)

    def test_quadraman_per_mode_lines(self):
        scenario = build_scenario(load_preset("quadraman"))
        lines = resonance_lines(scenario, scenario.template.grid)
        assert [line.k for line in lines] == [0, 1, 2, 3, 4, 5]
        by_k = {line.k: line.omega0c for line in lines}
        assert by_k[5] == pytest.approx(1.0)  # band edge: omega_R = 2
        assert by_k[0] == pytest.approx(0.5)

    def test_quadcavity_threshold(self):
        scenario = build_scenario(load_preset("quadcavity"))
        lines = resonance_lines(scenario, scenario.template.grid)
        assert len(lines) == 1
        assert lines[0].kind == "threshold"
        assert lines[0].omega0c == pytest.approx(0.5)


class TestRunSweep:
    def test_row_layout(self, tiny_sweep):
        assert len(tiny_sweep.rows) == len(TINY_GRID) * 6
        keys = [(r.omega0c, r.k) for r in tiny_sweep.rows]
        assert keys == sorted(keys)
        assert not tiny_sweep.point_errors

    def test_squeezing_only_on_k0(self, tiny_sweep):
        for row in tiny_sweep.rows:
            if row.k == 0:
                assert row.V_min is not None and row.V_max is not None
            else:
                assert row.V_min is None

    def test_resonant_amplification_visible(self, tiny_sweep):
        at_res = [r for r in tiny_sweep.rows if r.omega0c == 0.5]
        assert all(r.dV_E > 0 for r in at_res)
        assert all(r.dV_Q < 0 for r in at_res)

    def test_deterministic(self):
        scenario = Scenario("flatflat", make_spec())
        a = run_sweep(scenario, TINY_GRID[:2], tiny_protocol())
        b = run_sweep(scenario, TINY_GRID[:2], tiny_protocol())
        for ra, rb in zip(a.rows, b.rows):
            assert ra == rb

    def test_annotations(self, tiny_sweep):
        assert all(r.annotation == "resonance=0.5" for r in tiny_sweep.rows)

    def test_bad_grid_rejected(self):
        scenario = Scenario("flatflat", make_spec())
        with pytest.raises(ValueError, match="strictly increasing"):
            run_sweep(scenario, [0.5, 0.4], tiny_protocol())
        with pytest.raises(ValueError, match="strictly increasing"):
            run_sweep(scenario, [-0.1, 0.5], tiny_protocol())

    def test_mode_series(self, tiny_sweep):
        series = tiny_sweep.mode_series("dV_E", k=3)
        assert series.shape == (3,)
        assert np.all(np.isfinite(series))

    def test_point_failures_recorded_and_sweep_continues(self):
        # an unstable step size aborts every trajectory at every point;
        # each failure is recorded and the sweep still returns
        scenario = Scenario("flatflat", make_spec(g=0.0, g4=0.0))
        ramp = RampSchedule(t_ramp=4000.0, t_settle=500.0, t_window=500.0,
                            sample_stride=100.0)
        proto = RunProtocol(n_trajectories=4, master_seed=1, ramp=ramp, dt=10.0)
        result = run_sweep(scenario, TINY_GRID, proto)
        assert result.rows == []
        assert len(result.point_errors) == len(TINY_GRID)
        assert all("aborted" in msg for _, msg in result.point_errors)


class TestCompareEffective:
    def test_identical_inputs_zero(self, tiny_sweep):
        table = compare_effective(tiny_sweep, tiny_sweep)
        assert len(table) == len(TINY_GRID)
        assert all(row.max_diff_e == 0.0 and row.max_diff_q == 0.0 for row in table)

    def test_single_mode_broadcast(self, tiny_sweep):
        scenario = Scenario("singlemode_eff", make_spec(half_width=0))
        single = run_sweep(scenario, TINY_GRID, tiny_protocol())
        table = compare_effective(tiny_sweep, single)
        assert len(table) == len(TINY_GRID)
        for row in table:
            assert row.max_diff_e >= 0 and row.pooled_err_e > 0

    def test_grid_mismatch_rejected(self, tiny_sweep):
        scenario = Scenario("flatflat", make_spec())
        other = run_sweep(scenario, np.array([0.4, 0.5]), tiny_protocol())
        with pytest.raises(ValueError, match="grids"):
            compare_effective(tiny_sweep, other)


class TestQuadCavityAnnotations:
    def test_nonresonant_tag_above_threshold(self):
        scenario = build_scenario(load_preset("quadcavity"))
        result = run_sweep(scenario, np.array([0.4, 0.6]), tiny_protocol())
        low = [r for r in result.rows if r.omega0c == 0.4]
        high = [r for r in result.rows if r.omega0c == 0.6]
        assert all("nonresonant" not in r.annotation for r in low)
        assert all("nonresonant" in r.annotation for r in high)
        assert all("threshold=0.5" in r.annotation for r in result.rows)
