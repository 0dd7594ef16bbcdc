"""Langevin dynamics of the coupled cavity/Raman mode amplitudes.

State is a pair of complex amplitude vectors a_k (cavity) and b_q (Raman)
on the symmetric momentum grid.  The deterministic drift is

    da_k/dt = -i[ omega^c_k a_k + 2 g_r (B*A)_k + g4_r (A*(A*A))_k ] - kappa a_k
    db_q/dt = -i[ omega^R_q b_q + g_r (A*A)_q ] - (gamma/2) (b_q - conj(b_q))

where A_k = a_k + conj(a_{-k}) and B_q = b_q + conj(b_{-q}) are the
Hermitian field combinations, * denotes the momentum-space discrete
convolution under the grid's wrap policy, g_r = r g / sqrt(N) and
g4_r = r g4 / N with r the coupling ramp factor.  Stochastic forcing is
additive: a complex Gaussian force on every cavity mode, and a real
Gaussian force driving the imaginary (momentum) quadrature of every Raman
mode, each calibrated so the uncoupled thermal state is stationary.

Time stepping uses the stochastic Heun predictor-corrector scheme; noise
is additive, so the Ito and Stratonovich readings coincide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import TrajectoryAbortError
from .model import ModeGrid, RampSchedule, SystemSpec, WrapPolicy, thermal_weight
from .rng import PURPOSE_NOISE, draw_normals


@dataclass
class TrajectoryState:
    """One Wigner-sampled trajectory: cavity and Raman amplitudes at time t."""

    a: np.ndarray
    b: np.ndarray
    t: float = 0.0

    def copy(self) -> "TrajectoryState":
        return TrajectoryState(self.a.copy(), self.b.copy(), self.t)


@dataclass
class NoiseIncrement:
    """Integrated noise for one step: complex da per cavity mode, real db
    per Raman mode (the real force drives the momentum quadrature)."""

    da: np.ndarray
    db: np.ndarray


def hermitian_field(z: np.ndarray) -> np.ndarray:
    """A_k = z_k + conj(z_{-k}); satisfies A_{-k} = conj(A_k)."""
    return z + np.conj(z[::-1])


def mode_convolution(x: np.ndarray, y: np.ndarray, grid: ModeGrid) -> np.ndarray:
    """(x*y)_k = sum_q x_{k-q} y_q reduced to the grid by its wrap policy.

    Under WRAP the out-of-range momenta fold back modulo N; under TRUNCATE
    any product involving an out-of-range index is dropped, which equals
    the central window of the zero-extended linear convolution.
    """
    n = grid.n_modes
    m = grid.half_width
    full = np.convolve(x, y)
    if grid.wrap_policy is WrapPolicy.TRUNCATE:
        return full[m : m + n]
    out = np.zeros(n, dtype=full.dtype)
    for i in range(full.size):
        out[(i - m) % n] += full[i]
    return out


def drift(
    state: TrajectoryState, spec: SystemSpec, ramp_factor: float
) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic time derivative (da/dt, db/dt) including dissipators.

    ramp_factor scales both couplings simultaneously: g -> r g, g4 -> r g4.
    """
    grid = spec.grid
    n = grid.n_modes
    omega_c = spec.cavity_disp.table(grid)
    omega_r = spec.raman_disp.table(grid)
    g_r = ramp_factor * spec.g / math.sqrt(n)
    g4_r = ramp_factor * spec.g4 / n

    a, b = state.a, state.b
    if g_r == 0.0 and g4_r == 0.0:
        dadt = -1j * (omega_c * a) - spec.kappa * a
        dbdt = -1j * (omega_r * b) - 0.5 * spec.gamma * (b - np.conj(b))
        return dadt, dbdt

    big_a = hermitian_field(a)
    big_b = hermitian_field(b)
    conv_aa = mode_convolution(big_a, big_a, grid)
    conv_ba = mode_convolution(big_b, big_a, grid)
    quartic = mode_convolution(big_a, conv_aa, grid)

    dadt = -1j * (omega_c * a + 2.0 * g_r * conv_ba + g4_r * quartic) - spec.kappa * a
    dbdt = -1j * (omega_r * b + g_r * conv_aa) - 0.5 * spec.gamma * (b - np.conj(b))
    return dadt, dbdt


def noise_amplitudes(spec: SystemSpec, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-step noise standard deviations.

    Returns (amp_a, amp_b): amp_a[k] is the std of each real quadrature of
    the complex cavity increment, so E|da_k|^2 = kappa (2 n(omega)+1) dt;
    amp_b[q] is the std of the real Raman increment, E[db_q^2] =
    (gamma/2) (2 n(omega)+1) dt, the unique calibration for which the
    quadrature-friction dissipator holds the thermal state stationary.
    """
    grid = spec.grid
    w_c = np.array([thermal_weight(w, spec.temperature) for w in spec.cavity_disp.table(grid)])
    w_r = np.array([thermal_weight(w, spec.temperature) for w in spec.raman_disp.table(grid)])
    amp_a = np.sqrt(spec.kappa * w_c * dt / 2.0)
    amp_b = np.sqrt(0.5 * spec.gamma * w_r * dt)
    return amp_a, amp_b


def initial_stds(spec: SystemSpec) -> tuple[np.ndarray, np.ndarray]:
    """Per-quadrature stds of the Wigner initial distribution.

    Each mode amplitude is complex Gaussian with E|z|^2 = (2n+1)/2 =
    coth(omega/2T)/2, i.e. 1/2 in vacuum.
    """
    grid = spec.grid
    w_c = np.array([thermal_weight(w, spec.temperature) for w in spec.cavity_disp.table(grid)])
    w_r = np.array([thermal_weight(w, spec.temperature) for w in spec.raman_disp.table(grid)])
    return np.sqrt(w_c) / 2.0, np.sqrt(w_r) / 2.0


def noise_increment(spec: SystemSpec, dt: float, rng) -> NoiseIncrement:
    """Draw one step's integrated Langevin noise.

    Consumes 3N standard normals laid out as [Re da | Im da | db]; with a
    TrajectoryStream this advances its step counter by one.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    n = spec.grid.n_modes
    amp_a, amp_b = noise_amplitudes(spec, dt)
    z = draw_normals(rng, 3 * n, PURPOSE_NOISE)
    da = amp_a * (z[:n] + 1j * z[n : 2 * n])
    db = amp_b * z[2 * n : 3 * n]
    return NoiseIncrement(da=da, db=db)


def _first_nonfinite(z: np.ndarray, grid: ModeGrid):
    bad = ~np.isfinite(z.real) | ~np.isfinite(z.imag)
    if bad.any():
        return int(np.argmax(bad)) - grid.half_width
    return None


def step(
    state: TrajectoryState,
    spec: SystemSpec,
    ramp: RampSchedule,
    dt: float,
    rng,
) -> TrajectoryState:
    """Advance one stochastic Heun step from t to t+dt.

    The ramp factor is evaluated at the step midpoint and reused for both
    drift evaluations; the additive noise increment is drawn once and
    enters the predictor and the corrector identically.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    r = ramp.factor(state.t + 0.5 * dt)
    noise = noise_increment(spec, dt, rng)
    db_complex = 1j * noise.db  # real force on the momentum quadrature

    f1a, f1b = drift(state, spec, r)
    predictor = TrajectoryState(
        a=state.a + dt * f1a + noise.da,
        b=state.b + dt * f1b + db_complex,
        t=state.t + dt,
    )
    f2a, f2b = drift(predictor, spec, r)
    new = TrajectoryState(
        a=state.a + 0.5 * dt * (f1a + f2a) + noise.da,
        b=state.b + 0.5 * dt * (f1b + f2b) + db_complex,
        t=state.t + dt,
    )

    for field, z in (("a", new.a), ("b", new.b)):
        k = _first_nonfinite(z, spec.grid)
        if k is not None:
            raise TrajectoryAbortError(new.t, field, k)
    return new
