"""Reported quantities computed from ensemble statistics.

All estimators work on the per-trajectory moment sums held by
EnsembleStats.  Standard errors come from leave-one-out jackknife over
trajectories (trajectories are the independent sampling units; window
samples within one trajectory are correlated).  When a coupled run and
its g=0 reference share the master seed, the runs are trajectory-paired
(common random numbers) and the jackknife removes each trajectory from
both runs at once, which propagates the pair covariance into the error of
the variance ratio automatically.

Reports cover nonnegative mode indices only: the Hermitian field
definitions make V(X_k) = V(X_{-k}) hold exactly, estimator included.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import EnsembleStats
from .errors import BaselineError, StatsMergeError

LENGTH_NOTE = ("dimensionless Raman shift <b_k + conj(b_-k)>; physical displacement "
               "= (l0/sqrt(2)) * shift with l0 = sqrt(hbar / (M omega0_R))")


# ---------------------------------------------------------------------------
# jackknife machinery
# ---------------------------------------------------------------------------

def _jackknife_se(loo: np.ndarray) -> np.ndarray:
    """Jackknife standard error from leave-one-out estimates (axis 0)."""
    n = loo.shape[0]
    mean = loo.mean(axis=0)
    return np.sqrt((n - 1) / n * ((loo - mean) ** 2).sum(axis=0))


def _abs2(z: np.ndarray) -> np.ndarray:
    return z.real ** 2 + z.imag ** 2


def _variance_and_loo(count_t, s1_t, s2_t):
    """Pooled variance estimate and its leave-one-out replicates.

    count_t: (T,) sample counts; s1_t: (T, N) complex field sums;
    s2_t: (T, N) absolute-square sums.
    """
    c_tot = count_t.sum()
    s1 = s1_t.sum(axis=0)
    s2 = s2_t.sum(axis=0)
    v = s2 / c_tot - _abs2(s1 / c_tot)
    c_loo = (c_tot - count_t)[:, None]
    v_loo = (s2 - s2_t) / c_loo - _abs2((s1 - s1_t) / c_loo)
    return v, v_loo


def _mean_and_loo(count_t, s1_t):
    c_tot = count_t.sum()
    s1 = s1_t.sum(axis=0)
    mean = s1 / c_tot
    c_loo = (c_tot - count_t)[:, None]
    loo = (s1 - s1_t) / c_loo
    return mean, loo


def _paired_active(coupled: EnsembleStats, baseline: EnsembleStats):
    """Trajectory pairing mask, or None when the runs are independent."""
    if coupled.master_seed != baseline.master_seed:
        return None
    if coupled.n_trajectories != baseline.n_trajectories:
        return None
    if not np.array_equal(coupled.traj_ids, baseline.traj_ids):
        return None
    return coupled.active & baseline.active


def _check_same_grid(coupled: EnsembleStats, baseline: EnsembleStats):
    if coupled.grid != baseline.grid:
        raise StatsMergeError("statistics live on different mode grids")


# ---------------------------------------------------------------------------
# variance reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VarianceReport:
    """Per-mode (k >= 0) variances with and without coupling, and their
    relative modifications delta V = (V_g - V_0)/V_0."""

    k: np.ndarray
    v_e_g: np.ndarray
    v_e_g_err: np.ndarray
    v_q_g: np.ndarray
    v_q_g_err: np.ndarray
    v_e_0: np.ndarray
    v_e_0_err: np.ndarray
    v_q_0: np.ndarray
    v_q_0_err: np.ndarray
    delta_e: np.ndarray
    delta_e_err: np.ndarray
    delta_q: np.ndarray
    delta_q_err: np.ndarray


@dataclass(frozen=True)
class ThermalReport:
    """Thermal-state variance modifications, including the
    cavity-normalized Raman deviation (V_Q_g - V_E_g)/V_E_g."""

    k: np.ndarray
    delta_e_th: np.ndarray
    delta_e_th_err: np.ndarray
    delta_q_th: np.ndarray
    delta_q_th_err: np.ndarray
    delta_qp_th: np.ndarray
    delta_qp_th_err: np.ndarray


@dataclass(frozen=True)
class SqueezingReport:
    """Extremal rotated-quadrature variances of the k=0 cavity mode."""

    v_min: float
    v_max: float
    theta_min: float
    n_angles: int
    anisotropy: float
    anisotropy_err: float


@dataclass(frozen=True)
class RamanShiftReport:
    """Re<Q_k> per mode k >= 0 with standard errors."""

    k: np.ndarray
    shift: np.ndarray
    shift_err: np.ndarray
    length_note: str = LENGTH_NOTE


def _field_sums(pt: dict, which: str):
    if which == "E":
        return pt["count"], pt["sum_E"], pt["sum_absE2"]
    return pt["count"], pt["sum_Q"], pt["sum_absQ2"]


def _variance_pack(stats: EnsembleStats, which: str):
    pt = stats.per_traj()
    return _variance_and_loo(*_field_sums(pt, which))


def _delta_with_errors(coupled, baseline, which, paired_mask):
    """delta V estimate plus error, paired when possible."""
    if paired_mask is not None:
        pc = coupled.select(paired_mask).per_traj()
        pb = baseline.select(paired_mask).per_traj()
        vg, vg_loo = _variance_and_loo(*_field_sums(pc, which))
        v0, v0_loo = _variance_and_loo(*_field_sums(pb, which))
        delta = vg / v0 - 1.0
        delta_err = _jackknife_se(vg_loo / v0_loo - 1.0)
        return delta, delta_err
    vg, vg_loo = _variance_pack(coupled, which)
    v0, v0_loo = _variance_pack(baseline, which)
    delta = vg / v0 - 1.0
    se_g = _jackknife_se(vg_loo)
    se_0 = _jackknife_se(v0_loo)
    delta_err = np.sqrt((se_g / v0) ** 2 + (vg * se_0 / v0 ** 2) ** 2)
    return delta, delta_err


def delta_variances(coupled: EnsembleStats, baseline: EnsembleStats) -> VarianceReport:
    """Relative variance modification of both fields per mode.

    The baseline must be an uncoupled (g=0) run whose variances are
    statistically resolved from zero; a seed-paired baseline yields
    common-random-number error cancellation.
    """
    _check_same_grid(coupled, baseline)
    if baseline.spec.g != 0.0:
        raise BaselineError("baseline statistics must come from a g=0 run")

    m = coupled.grid.half_width
    sl = slice(m, None)

    v_e_g, v_e_g_loo = _variance_pack(coupled, "E")
    v_q_g, v_q_g_loo = _variance_pack(coupled, "Q")
    v_e_0, v_e_0_loo = _variance_pack(baseline, "E")
    v_q_0, v_q_0_loo = _variance_pack(baseline, "Q")
    v_e_0_err = _jackknife_se(v_e_0_loo)
    v_q_0_err = _jackknife_se(v_q_0_loo)

    for name, v0, se0 in (("V(E_k)_0", v_e_0, v_e_0_err), ("V(Q_k)_0", v_q_0, v_q_0_err)):
        if np.any(v0 < 10.0 * se0):
            raise BaselineError(f"{name} is consistent with zero; baseline invalid")

    paired = _paired_active(coupled, baseline)
    delta_e, delta_e_err = _delta_with_errors(coupled, baseline, "E", paired)
    delta_q, delta_q_err = _delta_with_errors(coupled, baseline, "Q", paired)

    return VarianceReport(
        k=np.arange(m + 1),
        v_e_g=v_e_g[sl], v_e_g_err=_jackknife_se(v_e_g_loo)[sl],
        v_q_g=v_q_g[sl], v_q_g_err=_jackknife_se(v_q_g_loo)[sl],
        v_e_0=v_e_0[sl], v_e_0_err=v_e_0_err[sl],
        v_q_0=v_q_0[sl], v_q_0_err=v_q_0_err[sl],
        delta_e=delta_e[sl], delta_e_err=delta_e_err[sl],
        delta_q=delta_q[sl], delta_q_err=delta_q_err[sl],
    )


def thermal_deltas(coupled: EnsembleStats, baseline: EnsembleStats) -> ThermalReport:
    """Thermal variance modifications, plus the Raman deviation measured
    against the coupled cavity variance instead of the free Raman one."""
    _check_same_grid(coupled, baseline)
    if coupled.spec.temperature <= 0.0:
        raise ValueError("thermal deltas require a run at temperature > 0")
    report = delta_variances(coupled, baseline)

    m = coupled.grid.half_width
    sl = slice(m, None)
    pc = coupled.per_traj()
    v_q, v_q_loo = _variance_and_loo(*_field_sums(pc, "Q"))
    v_e, v_e_loo = _variance_and_loo(*_field_sums(pc, "E"))
    delta_qp = v_q / v_e - 1.0
    delta_qp_err = _jackknife_se(v_q_loo / v_e_loo - 1.0)

    return ThermalReport(
        k=report.k,
        delta_e_th=report.delta_e, delta_e_th_err=report.delta_e_err,
        delta_q_th=report.delta_q, delta_q_th_err=report.delta_q_err,
        delta_qp_th=delta_qp[sl], delta_qp_th_err=delta_qp_err[sl],
    )


# ---------------------------------------------------------------------------
# squeezing
# ---------------------------------------------------------------------------

def _theta_variances(vxx, vyy, vxy, theta):
    """Variance of X_theta = a0 e^{-i theta} + conj(a0) e^{i theta}."""
    c = np.cos(theta)
    s = np.sin(theta)
    return 4.0 * (np.multiply.outer(vxx, c * c)
                  + np.multiply.outer(vyy, s * s)
                  + np.multiply.outer(vxy, 2.0 * c * s))


def squeezing_scan(stats: EnsembleStats, n_angles: int = 180) -> SqueezingReport:
    """Extremal variance of the rotated k=0 cavity quadrature.

    V_theta follows in closed form from the accumulated 2x2 quadrature
    covariance; theta runs over a uniform grid on [0, pi)."""
    if n_angles < 8:
        raise ValueError("n_angles must be at least 8")
    if stats.total_count == 0:
        raise ValueError("empty quadrature accumulator")

    theta = np.arange(n_angles) * np.pi / n_angles
    _, cov = stats.quad_covariance()
    v_theta = _theta_variances(cov[0, 0], cov[1, 1], cov[0, 1], theta)
    i_min = int(np.argmin(v_theta))
    i_max = int(np.argmax(v_theta))

    pt = stats.per_traj()
    c_t = pt["count"]
    q_t = pt["quad0"]
    c_loo = (c_t.sum() - c_t)[:, None]
    s_loo = q_t.sum(axis=0) - q_t
    mx = s_loo[:, 0] / c_loo[:, 0]
    my = s_loo[:, 1] / c_loo[:, 0]
    vxx = s_loo[:, 2] / c_loo[:, 0] - mx * mx
    vyy = s_loo[:, 3] / c_loo[:, 0] - my * my
    vxy = s_loo[:, 4] / c_loo[:, 0] - mx * my
    v_theta_loo = _theta_variances(vxx, vyy, vxy, theta)
    aniso_loo = v_theta_loo.max(axis=1) - v_theta_loo.min(axis=1)

    return SqueezingReport(
        v_min=float(v_theta[i_min]),
        v_max=float(v_theta[i_max]),
        theta_min=float(theta[i_min]),
        n_angles=n_angles,
        anisotropy=float(v_theta[i_max] - v_theta[i_min]),
        anisotropy_err=float(_jackknife_se(aniso_loo[:, None])[0]),
    )


# ---------------------------------------------------------------------------
# Raman shift
# ---------------------------------------------------------------------------

def raman_shift(stats: EnsembleStats) -> RamanShiftReport:
    """Mean Raman coordinate Re<Q_k> per mode with standard errors."""
    m = stats.grid.half_width
    sl = slice(m, None)
    pt = stats.per_traj()
    mean, loo = _mean_and_loo(pt["count"], pt["sum_Q"])
    se = _jackknife_se(loo.real)
    return RamanShiftReport(k=np.arange(m + 1), shift=mean.real[sl], shift_err=se[sl])


# ---------------------------------------------------------------------------
# autocorrelation guard
# ---------------------------------------------------------------------------

def blocked_variance_se(stats: EnsembleStats, which: str = "E", scale: int = 1) -> np.ndarray:
    """Standard error of V(X_k) treating (trajectory, coarse time block)
    sums as independent units.

    For short blocks the units are time-correlated and the estimate is
    biased low; it must grow (or plateau) as `scale` doubles.  Reported
    errors elsewhere always use whole trajectories as units.
    """
    pb = stats.per_block(scale)
    count = pb["count"]
    if which == "E":
        _, loo = _variance_and_loo(count, pb["sum_E"], pb["sum_absE2"])
    else:
        _, loo = _variance_and_loo(count, pb["sum_Q"], pb["sum_absQ2"])
    return _jackknife_se(loo)
