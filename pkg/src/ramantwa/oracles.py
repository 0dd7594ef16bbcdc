"""Independent verification oracles.

These deliberately do not share code with the production paths they
check:

* `drift_brute_force` evaluates the equations of motion term by term with
  explicit triple loops and per-operator index bookkeeping, against which
  the convolution-structured drift is pinned to 1e-12.
* The analytic laws (damped-oscillator decay, Ornstein-Uhlenbeck steady
  state, thermal coth occupations, rotated-Gaussian quadrature variances)
  supply the expected values for the statistical suites.

`run_suite` drives the same checks from the command line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import TrajectoryState, drift
from .model import (
    Dispersion,
    DispersionKind,
    ModeGrid,
    SystemSpec,
    WrapPolicy,
    thermal_weight,
)


# ---------------------------------------------------------------------------
# brute-force drift
# ---------------------------------------------------------------------------

def drift_brute_force(state: TrajectoryState, spec: SystemSpec,
                      ramp_factor: float) -> tuple[np.ndarray, np.ndarray]:
    """Equations of motion summed literally, one operator index at a time.

    Out-of-grid indices either fold back periodically (Wrap) or remove the
    whole summand (Truncate).
    """
    grid = spec.grid
    m = grid.half_width
    n = grid.n_modes
    wrap = grid.wrap_policy is WrapPolicy.WRAP
    a, b = state.a, state.b
    g_r = ramp_factor * spec.g / math.sqrt(n)
    g4_r = ramp_factor * spec.g4 / n

    def pos(k):
        """Array position of momentum k, or None if the operator is absent."""
        if -m <= k <= m:
            return k + m
        if wrap:
            return (k + m) % n
        return None

    def a_field(k):
        """a_k + conj(a_{-k}), or None when the index leaves the grid."""
        p = pos(k)
        if p is None:
            return None
        return a[p] + np.conj(a[pos(-k)])

    def b_field(k):
        p = pos(k)
        if p is None:
            return None
        return b[p] + np.conj(b[pos(-k)])

    modes = range(-m, m + 1)
    dadt = np.zeros(n, dtype=complex)
    dbdt = np.zeros(n, dtype=complex)

    for k in modes:
        ham = spec.cavity_disp.evaluate(grid, k) * a[k + m]
        for q in modes:
            bf = b_field(k - q)
            if bf is None:
                continue
            ham += 2.0 * g_r * bf * a_field(q)
        for kp in modes:
            f2 = a_field(kp)
            for q in modes:
                f1 = a_field(k + q)
                if f1 is None:
                    continue
                f3 = a_field(-kp - q)
                if f3 is None:
                    continue
                ham += g4_r * f1 * f2 * f3
        dadt[k + m] = -1j * ham - spec.kappa * a[k + m]

    for q in modes:
        ham = spec.raman_disp.evaluate(grid, q) * b[q + m]
        for k in modes:
            f2 = a_field(-k + q)
            if f2 is None:
                continue
            ham += g_r * a_field(k) * f2
        dbdt[q + m] = -1j * ham - 0.5 * spec.gamma * (b[q + m] - np.conj(b[q + m]))

    return dadt, dbdt


def max_drift_deviation(spec: SystemSpec, n_states: int, seed: int = 0,
                        amplitude: float = 1.0) -> float:
    """Largest |convolution drift - brute force| component over random states."""
    rng = np.random.default_rng(seed)
    n = spec.grid.n_modes
    worst = 0.0
    for _ in range(n_states):
        state = TrajectoryState(
            a=amplitude * (rng.standard_normal(n) + 1j * rng.standard_normal(n)),
            b=amplitude * (rng.standard_normal(n) + 1j * rng.standard_normal(n)),
        )
        ramp = rng.uniform(0.1, 1.0)
        da1, db1 = drift(state, spec, ramp)
        da2, db2 = drift_brute_force(state, spec, ramp)
        worst = max(worst, float(np.abs(da1 - da2).max()), float(np.abs(db1 - db2).max()))
    return worst


# ---------------------------------------------------------------------------
# analytic laws
# ---------------------------------------------------------------------------

def damped_mode_solution(a0: complex, omega: float, kappa: float, t: float) -> complex:
    """Uncoupled noiseless cavity mode: a(t) = a0 exp(-(i omega + kappa) t)."""
    return a0 * np.exp(-(1j * omega + kappa) * t)


def stationary_mode_occupation(omega: float, temperature: float) -> float:
    """Uncoupled steady-state <|z|^2> = coth(omega/2T)/2 (1/2 in vacuum)."""
    return 0.5 * thermal_weight(omega, temperature)


def rotated_quadrature_variance(vxx: float, vyy: float, vxy: float, theta: float) -> float:
    """Var of a0 e^{-i theta} + conj(a0) e^{i theta} for Gaussian a0."""
    c, s = math.cos(theta), math.sin(theta)
    return 4.0 * (vxx * c * c + vyy * s * s + 2.0 * vxy * c * s)


def flat_system(omega_c: float = 0.5, omega_r: float = 1.0, g: float = 0.04,
                g4: float = 0.01, kappa: float = 0.02, gamma: float = 0.02,
                temperature: float = 0.0, half_width: int = 5,
                wrap: WrapPolicy = WrapPolicy.WRAP) -> SystemSpec:
    """Conveniently parametrized flat/flat system (defaults as reported)."""
    return SystemSpec(
        grid=ModeGrid(half_width=half_width, wrap_policy=wrap),
        cavity_disp=Dispersion(DispersionKind.FLAT, omega_c),
        raman_disp=Dispersion(DispersionKind.FLAT, omega_r),
        g=g, g4=g4, kappa=kappa, gamma=gamma, temperature=temperature,
    )


# ---------------------------------------------------------------------------
# command-line oracle suites
# ---------------------------------------------------------------------------

@dataclass
class OracleResult:
    name: str
    measured: float
    expected: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: measured={self.measured:.6g} "
                f"expected={self.expected:.6g} tol={self.tolerance:.3g}")


def _short_protocol(n_traj=400, seed=20240913):
    from .ensemble import RunProtocol
    from .model import RampSchedule, RampShape

    ramp = RampSchedule(shape=RampShape.SMOOTH_TANH, t_ramp=20.0, t_settle=20.0,
                        t_window=120.0, sample_stride=2.0)
    return RunProtocol(n_trajectories=n_traj, master_seed=seed, ramp=ramp, dt=0.005)


def _suite_drift() -> list[OracleResult]:
    results = []
    for wrap in (WrapPolicy.WRAP, WrapPolicy.TRUNCATE):
        spec = flat_system(wrap=wrap)
        dev = max_drift_deviation(spec, n_states=100, seed=7)
        results.append(OracleResult(
            f"drift convolution vs brute force ({wrap.value}, 100 random states)",
            dev, 0.0, 1e-12, dev <= 1e-12))
    return results


def _fdt_results(temperature: float) -> list[OracleResult]:
    from .ensemble import run_ensemble

    spec = flat_system(g=0.0, g4=0.0, temperature=temperature)
    proto = _short_protocol()
    stats = run_ensemble(spec.uncoupled(), proto)
    results = []
    for label, omega, var in (("cavity", 0.5, stats.var_E), ("Raman", 1.0, stats.var_Q)):
        expected = 2.0 * stationary_mode_occupation(omega, temperature)
        measured = float(var.mean())
        spread = float(var.std()) + 1e-12
        tol = max(3.0 * spread, 0.05 * expected)
        results.append(OracleResult(
            f"steady V({label}) at T={temperature:g} (g=0)",
            measured, expected, tol, abs(measured - expected) <= tol))
    return results


def _suite_fdt() -> list[OracleResult]:
    return _fdt_results(0.0)


def _suite_thermal() -> list[OracleResult]:
    return _fdt_results(2.0)


def _suite_squeezing() -> list[OracleResult]:
    rng = np.random.default_rng(2468)
    n_draw = 200_000
    x = math.sqrt(0.2) * rng.standard_normal(n_draw)
    y = math.sqrt(0.4) * rng.standard_normal(n_draw)
    vxx, vyy, vxy = x.var(), y.var(), (x * y).mean() - x.mean() * y.mean()
    results = []
    for theta, expected in ((0.0, 4 * 0.2), (math.pi / 2, 4 * 0.4), (math.pi / 4, 2 * 0.6)):
        measured = rotated_quadrature_variance(vxx, vyy, vxy, theta)
        tol = 0.02 * expected
        results.append(OracleResult(
            f"rotated quadrature variance, synthetic cloud, theta={theta:.3f}",
            measured, expected, tol, abs(measured - expected) <= tol))
    return results


SUITES = {
    "drift": _suite_drift,
    "fdt": _suite_fdt,
    "thermal": _suite_thermal,
    "squeezing": _suite_squeezing,
}


def run_suite(name: str) -> list[OracleResult]:
    if name == "all":
        out = []
        for suite in SUITES.values():
            out.extend(suite())
        return out
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name]()
