import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ramantwa import (
    RampSchedule,
    TrajectoryAbortError,
    TrajectoryState,
    WrapPolicy,
    drift,
    noise_increment,
    step,
)
from ramantwa.dynamics import hermitian_field, noise_amplitudes
from ramantwa.oracles import damped_mode_solution, drift_brute_force, max_drift_deviation
from ramantwa.rng import TrajectoryStream

from conftest import make_spec


class ZeroNoise:
    """Noise-off stand-in for a random stream."""

    def standard_normal(self, n):
        return np.zeros(n)


def random_state(n, seed, amplitude=1.0):
    rng = np.random.default_rng(seed)
    return TrajectoryState(
        a=amplitude * (rng.standard_normal(n) + 1j * rng.standard_normal(n)),
        b=amplitude * (rng.standard_normal(n) + 1j * rng.standard_normal(n)),
    )


class TestDrift:
    def test_zero_state_zero_derivative(self):
        spec = make_spec()
        st_ = TrajectoryState(a=np.zeros(11, complex), b=np.zeros(11, complex))
        da, db = drift(st_, spec, 1.0)
        assert np.all(da == 0) and np.all(db == 0)

    def test_single_mode_hand_values(self):
        # a0=0.1, b0=0.2, flat bands at unit frequency, g=0.04, g4=0:
        # the Hamiltonian parts give i da/dt = 0.1064 and i db/dt = 0.2016
        spec = make_spec(omega_c=1.0, g=0.04, g4=0.0, half_width=0)
        st_ = TrajectoryState(a=np.array([0.1 + 0j]), b=np.array([0.2 + 0j]))
        da, db = drift(st_, spec, 1.0)
        i_da = 1j * (da + spec.kappa * st_.a)
        i_db = 1j * (db + 0.5 * spec.gamma * (st_.b - np.conj(st_.b)))
        assert i_da[0] == pytest.approx(0.1064, abs=1e-15)
        assert i_db[0] == pytest.approx(0.2016, abs=1e-15)

    @pytest.mark.parametrize("wrap", [WrapPolicy.WRAP, WrapPolicy.TRUNCATE])
    def test_matches_brute_force(self, wrap):
        spec = make_spec(wrap=wrap)
        assert max_drift_deviation(spec, n_states=25, seed=11) <= 1e-12

    @pytest.mark.parametrize("wrap", [WrapPolicy.WRAP, WrapPolicy.TRUNCATE])
    def test_matches_brute_force_dispersive(self, wrap):
        from ramantwa import DispersionKind
        spec = make_spec(wrap=wrap, cavity_kind=DispersionKind.QUADRATIC,
                         cavity_bw=1.0, raman_kind=DispersionKind.QUADRATIC,
                         raman_bw=1.0)
        assert max_drift_deviation(spec, n_states=25, seed=12) <= 1e-12

    def test_ramp_scales_both_couplings(self):
        spec = make_spec()
        st_ = random_state(11, seed=4)
        da0, db0 = drift(st_, spec, 0.0)
        da_free, db_free = drift(st_, spec.uncoupled(), 1.0)
        np.testing.assert_allclose(da0, da_free, atol=1e-15)
        np.testing.assert_allclose(db0, db_free, atol=1e-15)
        da_half, _ = drift(st_, spec, 0.5)
        da_brute, _ = drift_brute_force(st_, spec, 0.5)
        np.testing.assert_allclose(da_half, da_brute, atol=1e-12)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_hermitian_identity(self, seed):
        z = random_state(11, seed).a
        field = hermitian_field(z)
        assert np.array_equal(np.conj(field[::-1]), field)


class TestNoise:
    def test_zero_rates_zero_increments(self):
        spec = make_spec(kappa=0.0, gamma=0.0)  # unvalidated on purpose
        inc = noise_increment(spec, 0.005, np.random.default_rng(0))
        assert np.all(inc.da == 0) and np.all(inc.db == 0)

    def test_db_is_real(self):
        inc = noise_increment(make_spec(), 0.005, np.random.default_rng(1))
        assert np.isrealobj(inc.db)

    def test_cavity_increment_variance(self):
        # E|da|^2 = kappa dt = 1e-4 for the reported rates
        spec = make_spec(kappa=0.02)
        rng = np.random.default_rng(42)
        total, count = 0.0, 0
        for _ in range(20_000):
            inc = noise_increment(spec, 0.005, rng)
            total += float(np.sum(np.abs(inc.da) ** 2))
            count += inc.da.size
        assert total / count == pytest.approx(1e-4, rel=0.01)

    def test_raman_increment_variance(self):
        # quadrature friction holds the vacuum fixed: E[db^2] = gamma dt / 2
        spec = make_spec(gamma=0.02)
        rng = np.random.default_rng(43)
        total, count = 0.0, 0
        for _ in range(20_000):
            inc = noise_increment(spec, 0.005, rng)
            total += float(np.sum(inc.db**2))
            count += inc.db.size
        assert total / count == pytest.approx(0.5 * 0.02 * 0.005, rel=0.01)

    def test_thermal_scaling(self):
        amp0, amp0b = noise_amplitudes(make_spec(), 0.005)
        ampT, ampTb = noise_amplitudes(make_spec(temperature=2.0), 0.005)
        coth_c = 1.0 / np.tanh(0.5 / 4.0)
        coth_r = 1.0 / np.tanh(1.0 / 4.0)
        np.testing.assert_allclose(ampT**2, amp0**2 * coth_c, rtol=1e-12)
        np.testing.assert_allclose(ampTb**2, amp0b**2 * coth_r, rtol=1e-12)

    def test_bad_dt_rejected(self):
        with pytest.raises(ValueError, match="dt"):
            noise_increment(make_spec(), 0.0, np.random.default_rng(0))


class TestStep:
    def test_damped_oscillator_closed_form(self):
        # uncoupled, noiseless: a(t) = exp(-(i omega + kappa) t); Heun at
        # dt = 5e-4 keeps modulus and phase within 1e-6 over t=10
        spec = make_spec(omega_c=1.0, g=0.0, g4=0.0, half_width=0)
        ramp = RampSchedule(t_ramp=1.0, t_settle=1.0, t_window=1.0, sample_stride=1.0)
        state = TrajectoryState(a=np.array([1.0 + 0j]), b=np.array([0.0 + 0j]))
        dt = 5e-4
        rng = ZeroNoise()
        for _ in range(20_000):
            state = step(state, spec, ramp, dt, rng)
        exact = damped_mode_solution(1.0, 1.0, spec.kappa, 10.0)
        assert abs(abs(state.a[0]) - abs(exact)) < 1e-6
        phase_diff = np.angle(state.a[0] / exact)
        assert abs(phase_diff) < 1e-6

    def test_zero_state_is_fixed_point(self):
        spec = make_spec()
        ramp = RampSchedule(t_ramp=1.0, t_settle=1.0, t_window=1.0, sample_stride=1.0)
        state = TrajectoryState(a=np.zeros(11, complex), b=np.zeros(11, complex))
        for _ in range(50):
            state = step(state, spec, ramp, 0.01, ZeroNoise())
        assert np.all(state.a == 0) and np.all(state.b == 0)

    def test_deterministic(self):
        spec = make_spec()
        ramp = RampSchedule(t_ramp=1.0, t_settle=1.0, t_window=1.0, sample_stride=1.0)
        results = []
        for _ in range(2):
            state = random_state(11, seed=9, amplitude=0.5)
            stream = TrajectoryStream(2024, 3)
            for _ in range(20):
                state = step(state, spec, ramp, 0.01, stream)
            results.append(state)
        assert np.array_equal(results[0].a, results[1].a)
        assert np.array_equal(results[0].b, results[1].b)

    def test_nonfinite_aborts_with_location(self):
        # uncoupled so the bad entry cannot spread within the step
        spec = make_spec(g=0.0, g4=0.0)
        ramp = RampSchedule(t_ramp=1.0, t_settle=1.0, t_window=1.0, sample_stride=1.0)
        a = np.zeros(11, complex)
        a[7] = np.inf  # mode k = +2
        state = TrajectoryState(a=a, b=np.zeros(11, complex), t=1.5)
        with pytest.raises(TrajectoryAbortError) as err:
            step(state, spec, ramp, 0.01, ZeroNoise())
        assert err.value.field == "a"
        assert err.value.mode == 2
        assert err.value.t == pytest.approx(1.51)

    def test_bad_dt_rejected(self):
        spec = make_spec()
        ramp = RampSchedule(t_ramp=1.0, t_settle=1.0, t_window=1.0, sample_stride=1.0)
        state = random_state(11, seed=1)
        with pytest.raises(ValueError, match="dt"):
            step(state, spec, ramp, -0.01, ZeroNoise())
