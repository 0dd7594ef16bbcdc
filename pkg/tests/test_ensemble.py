import numpy as np
import pytest
from dataclasses import replace

from ramantwa import (
    EnsembleRunError,
    EnsembleStats,
    RampSchedule,
    RunProtocol,
    SpecValidationError,
    StatsMergeError,
    merge_stats,
    run_ensemble,
    sample_initial,
)
from ramantwa.ensemble import ProtocolTiming
from ramantwa.model import thermal_weight
from ramantwa.observables import blocked_variance_se
from ramantwa.rng import TrajectoryStream
from ramantwa.workers import set_workers

from conftest import COUPLED_RAMP, SHORT_RAMP, make_spec


class TestInitialSampling:
    def test_vacuum_occupation(self):
        spec = make_spec()
        draws = [sample_initial(spec, TrajectoryStream(7, i)) for i in range(4000)]
        a = np.array([d.a for d in draws])
        b = np.array([d.b for d in draws])
        for z in (a, b):
            occ = np.mean(np.abs(z) ** 2)
            se = np.std(np.abs(z) ** 2) / np.sqrt(z.size)
            assert abs(occ - 0.5) < 3 * se

    def test_thermal_occupation(self):
        # omega0_R = T/2: <|b|^2> = coth(1/4)/2 ~ 2.04
        spec = make_spec(temperature=2.0)
        rng = np.random.default_rng(11)
        b = np.array([sample_initial(spec, rng).b for _ in range(4000)])
        occ = np.mean(np.abs(b) ** 2)
        se = np.std(np.abs(b) ** 2) / np.sqrt(b.size)
        expected = 0.5 * thermal_weight(1.0, 2.0)
        assert expected == pytest.approx(2.0416, abs=2e-4)
        assert abs(occ - expected) < 3 * se

    def test_zero_mean(self):
        spec = make_spec()
        rng = np.random.default_rng(12)
        a = np.array([sample_initial(spec, rng).a for _ in range(4000)])
        se = np.sqrt(0.25 / a.size)
        assert abs(a.real.mean()) < 3 * se
        assert abs(a.imag.mean()) < 3 * se


class TestProtocolTiming:
    def test_reported_window_schedule(self):
        ramp = RampSchedule(t_ramp=600.0, t_settle=200.0, t_window=200.0,
                            sample_stride=1.0)
        timing = ProtocolTiming.build(ramp, 0.005, 8)
        assert timing.n_steps == 200_000
        assert timing.sample_start == 160_000
        assert timing.stride_steps == 200
        assert timing.n_samples == 200
        blocks = timing.block_of_sample()
        assert blocks.shape == (200,)
        assert blocks.min() == 0 and blocks.max() == 7
        assert np.all(np.bincount(blocks) == 25)

    def test_protocol_validation(self):
        with pytest.raises(SpecValidationError, match="n_trajectories"):
            RunProtocol(n_trajectories=1, master_seed=0)


class TestFdtSteadyState:
    def test_vacuum_variances(self, vacuum_stats):
        # steady state = initial Wigner state: V(E_k) = V(Q_k) = 1 at T=0
        for var, which in ((vacuum_stats.var_E, "E"), (vacuum_stats.var_Q, "Q")):
            se = blocked_variance_se(vacuum_stats, which, scale=vacuum_stats.n_time_blocks)
            assert np.all(np.abs(var - 1.0) < 3 * se), (which, var, se)

    def test_thermal_variances(self, thermal_stats):
        wc = thermal_weight(0.5, 2.0)
        wr = thermal_weight(1.0, 2.0)
        se_e = blocked_variance_se(thermal_stats, "E", scale=thermal_stats.n_time_blocks)
        se_q = blocked_variance_se(thermal_stats, "Q", scale=thermal_stats.n_time_blocks)
        assert np.all(np.abs(thermal_stats.var_E - wc) < 3 * se_e)
        assert np.all(np.abs(thermal_stats.var_Q - wr) < 3 * se_q)

    def test_thermal_variances_dispersive(self, quadratic_thermal_stats):
        stats = quadratic_thermal_stats
        grid = stats.grid
        wc = np.array([thermal_weight(w, 2.0) for w in stats.spec.cavity_disp.table(grid)])
        wr = np.array([thermal_weight(w, 2.0) for w in stats.spec.raman_disp.table(grid)])
        se_e = blocked_variance_se(stats, "E", scale=stats.n_time_blocks)
        se_q = blocked_variance_se(stats, "Q", scale=stats.n_time_blocks)
        assert np.all(np.abs(stats.var_E - wc) < 3 * se_e)
        assert np.all(np.abs(stats.var_Q - wr) < 3 * se_q)

    def test_mode_symmetry_exact(self, vacuum_stats, resonant_pair):
        for stats in (vacuum_stats, resonant_pair[0]):
            assert np.array_equal(stats.var_E, stats.var_E[::-1])
            assert np.array_equal(stats.var_Q, stats.var_Q[::-1])


class TestDeterminism:
    def _small_run(self):
        spec = make_spec()
        ramp = RampSchedule(t_ramp=2.0, t_settle=1.0, t_window=4.0, sample_stride=0.5)
        proto = RunProtocol(n_trajectories=70, master_seed=31, ramp=ramp, dt=0.01)
        return run_ensemble(spec, proto)

    def test_bitwise_repeatable(self):
        s1, s2 = self._small_run(), self._small_run()
        assert np.array_equal(s1.sum_E, s2.sum_E)
        assert np.array_equal(s1.sum_absQ2, s2.sum_absQ2)
        assert np.array_equal(s1.quad0, s2.quad0)

    def test_worker_count_invariance(self):
        results = []
        for workers in (1, 2, 4):
            set_workers(workers)
            results.append(self._small_run())
        set_workers(2)
        for other in results[1:]:
            assert np.array_equal(results[0].sum_E, other.sum_E)
            assert np.array_equal(results[0].sum_absE2, other.sum_absE2)

    def test_python_engine_matches_kernel(self):
        spec = make_spec()
        ramp = RampSchedule(t_ramp=1.0, t_settle=0.5, t_window=1.0, sample_stride=0.25)
        proto = RunProtocol(n_trajectories=4, master_seed=77, ramp=ramp, dt=0.01)
        s_nb = run_ensemble(spec, proto, engine="numba")
        s_py = run_ensemble(spec, proto, engine="python")
        for name in ("sum_E", "sum_absE2", "sum_Q", "sum_absQ2", "quad0"):
            np.testing.assert_allclose(getattr(s_nb, name), getattr(s_py, name),
                                       rtol=0, atol=1e-12)
        assert np.array_equal(s_nb.count, s_py.count)


class TestMerge:
    def test_split_and_merge_recovers(self, vacuum_stats):
        n = vacuum_stats.n_trajectories
        mask = np.zeros(n, dtype=bool)
        mask[: n // 2] = True
        merged = merge_stats(vacuum_stats.select(mask), vacuum_stats.select(~mask))
        assert merged.total_count == vacuum_stats.total_count
        assert np.array_equal(merged.traj_ids, vacuum_stats.traj_ids)
        np.testing.assert_allclose(merged.var_E, vacuum_stats.var_E, rtol=1e-10)
        np.testing.assert_allclose(merged.mean_Q, vacuum_stats.mean_Q, rtol=0, atol=1e-10)

    def test_counts_add(self, vacuum_stats):
        half = vacuum_stats.n_trajectories // 2
        mask = np.arange(vacuum_stats.n_trajectories) < half
        merged = merge_stats(vacuum_stats.select(mask), vacuum_stats.select(~mask))
        assert merged.n_trajectories == vacuum_stats.n_trajectories

    def test_merge_empty_identity(self, vacuum_stats):
        empty = EnsembleStats.empty(vacuum_stats.spec, vacuum_stats.master_seed,
                                    vacuum_stats.dt, vacuum_stats.ramp,
                                    vacuum_stats.n_time_blocks)
        merged = merge_stats(vacuum_stats, empty)
        assert np.array_equal(merged.sum_E, vacuum_stats.sum_E)
        assert np.array_equal(merged.count, vacuum_stats.count)

    def test_associative_within_rounding(self, vacuum_stats):
        n = vacuum_stats.n_trajectories
        idx = np.arange(n)
        parts = [vacuum_stats.select((idx % 3) == r) for r in range(3)]
        left = merge_stats(merge_stats(parts[0], parts[1]), parts[2])
        right = merge_stats(parts[0], merge_stats(parts[1], parts[2]))
        np.testing.assert_allclose(left.var_E, right.var_E, rtol=1e-10)
        assert np.array_equal(left.traj_ids, right.traj_ids)

    def test_variance_nonnegative_after_merge(self, vacuum_stats, thermal_stats):
        for stats in (vacuum_stats, thermal_stats):
            assert np.all(stats.var_E >= 0)
            assert np.all(stats.var_Q >= 0)

    def test_incompatible_rejected(self, vacuum_stats, thermal_stats):
        with pytest.raises(StatsMergeError):
            merge_stats(vacuum_stats, thermal_stats)
        with pytest.raises(StatsMergeError, match="overlap"):
            merge_stats(vacuum_stats, vacuum_stats)


class TestErrorAnalysis:
    def test_se_scales_with_trajectories(self, vacuum_stats):
        n = vacuum_stats.n_trajectories
        quarter = vacuum_stats.select(np.arange(n) < n // 4)
        se_quarter = blocked_variance_se(quarter, "E", scale=quarter.n_time_blocks)
        se_full = blocked_variance_se(vacuum_stats, "E", scale=vacuum_stats.n_time_blocks)
        ratio = (se_quarter / se_full).mean()
        assert 1.4 < ratio < 2.9  # expect ~2 for a 4x trajectory range

    def test_blocking_guard(self, vacuum_stats):
        # window samples are autocorrelated: the naive (fine-block) error
        # estimate must not exceed coarser-block estimates
        scales = [1, 2, 4, 8]
        ses = [blocked_variance_se(vacuum_stats, "E", scale=s).mean() for s in scales]
        for fine, coarse in zip(ses, ses[1:]):
            assert coarse >= 0.85 * fine
        assert ses[-1] > ses[0]  # correlation is strong at stride << 1/kappa

    def test_weak_convergence_in_dt(self):
        spec = make_spec()
        stats = {}
        for dt in (0.02, 0.01):
            proto = RunProtocol(n_trajectories=160, master_seed=55,
                                ramp=COUPLED_RAMP, dt=dt)
            stats[dt] = run_ensemble(spec, proto)
        diff = np.abs(stats[0.02].var_E - stats[0.01].var_E)
        pooled = np.sqrt(
            blocked_variance_se(stats[0.02], "E", scale=8) ** 2
            + blocked_variance_se(stats[0.01], "E", scale=8) ** 2)
        assert np.all(diff < 3 * pooled)


class TestAbortHandling:
    def test_unstable_run_fails_with_details(self):
        # a absurdly large dt makes Heun exponentially unstable, so every
        # trajectory overflows deterministically
        spec = make_spec(g=0.0, g4=0.0)
        ramp = RampSchedule(t_ramp=4000.0, t_settle=500.0, t_window=500.0,
                            sample_stride=100.0)
        proto = RunProtocol(n_trajectories=8, master_seed=1, ramp=ramp, dt=10.0)
        with pytest.raises(EnsembleRunError) as err:
            run_ensemble(spec, proto)
        assert err.value.n_aborted == 8
        traj_id, t_bad, field, mode = err.value.details[0]
        assert field in ("a", "b")
        assert t_bad > 0
