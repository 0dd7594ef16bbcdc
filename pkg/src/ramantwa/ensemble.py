"""Trajectory-ensemble execution and mergeable moment statistics.

A run samples Wigner initial conditions, integrates every trajectory
through ramp -> settle -> sampling window, and pools per-mode field moments
over (trajectories x window samples).  Moment sums are kept per
(trajectory, time block) so that downstream error analysis can jackknife
over independent trajectories and check sampling autocorrelation by block
coarsening.

Reproducibility contract: all randomness derives from (master_seed,
trajectory index) through counter-based streams, each trajectory owns its
output slot, and pooling always sums in trajectory order, so results are
bitwise independent of worker count and of how statistics were merged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import (
    TrajectoryState,
    hermitian_field,
    initial_stds,
    noise_amplitudes,
    step,
)
from .errors import EnsembleRunError, SpecValidationError, StatsMergeError, TrajectoryAbortError
from .model import ModeGrid, RampSchedule, SystemSpec, WrapPolicy, validate_spec
from .rng import PURPOSE_INIT, TrajectoryStream, draw_normals

ABORT_FRACTION_LIMIT = 1e-3


@dataclass(frozen=True)
class RunProtocol:
    """Ensemble execution parameters.

    Per-trajectory random streams are derived from (master_seed,
    trajectory index) via a counter-based generator; `paired_baseline`
    marks that reference runs should reuse the same master seed (common
    random numbers).
    """

    n_trajectories: int
    master_seed: int
    ramp: RampSchedule = field(default_factory=RampSchedule)
    dt: float = 0.005
    paired_baseline: bool = True
    time_blocks: int = 8

    def __post_init__(self):
        problems = []
        if self.n_trajectories < 2:
            problems.append("n_trajectories must be at least 2")
        if not self.dt > 0:
            problems.append("dt must be positive")
        if self.time_blocks < 1:
            problems.append("time_blocks must be at least 1")
        if problems:
            raise SpecValidationError(problems)


@dataclass(frozen=True)
class ProtocolTiming:
    """Integer step schedule derived from (ramp, dt)."""

    n_steps: int
    sample_start: int
    stride_steps: int
    n_samples: int
    n_time_blocks: int

    @classmethod
    def build(cls, ramp: RampSchedule, dt: float, time_blocks: int) -> "ProtocolTiming":
        n_steps = int(round(ramp.t_total / dt))
        sample_start = int(round(ramp.t_sample_start / dt))
        stride_steps = max(1, int(round(ramp.sample_stride / dt)))
        n_samples = int(math.floor(ramp.t_window / ramp.sample_stride + 1e-9))
        if sample_start < n_steps:
            max_fit = (n_steps - 1 - sample_start) // stride_steps + 1
            n_samples = min(n_samples, max_fit)
        else:
            n_samples = 0
        return cls(n_steps, sample_start, stride_steps, max(1, n_samples),
                   min(time_blocks, max(1, n_samples)))

    def block_of_sample(self) -> np.ndarray:
        idx = np.arange(self.n_samples, dtype=np.int64)
        return (idx * self.n_time_blocks) // self.n_samples

    def ramp_midpoints(self, ramp: RampSchedule, dt: float) -> np.ndarray:
        return np.array([ramp.factor((s + 0.5) * dt) for s in range(self.n_steps)])


@dataclass(eq=False)
class EnsembleStats:
    """Per-mode field moments pooled over trajectories and window samples.

    Moment sums are stored per (trajectory, time block); pooled estimators
    sum them in trajectory order.  `quad0` holds the running sums
    (x, y, x^2, y^2, xy) of the k=0 cavity quadratures for squeezing
    analysis.  Aborted trajectories carry zeroed sums and are excluded
    from every estimator.
    """

    spec: SystemSpec
    master_seed: int
    dt: float
    ramp: RampSchedule
    n_time_blocks: int
    traj_ids: np.ndarray
    count: np.ndarray
    sum_E: np.ndarray
    sum_absE2: np.ndarray
    sum_Q: np.ndarray
    sum_absQ2: np.ndarray
    quad0: np.ndarray
    aborted: np.ndarray
    abort_time: np.ndarray
    abort_field: np.ndarray
    abort_mode: np.ndarray

    # -- construction ------------------------------------------------

    @classmethod
    def empty(cls, spec: SystemSpec, master_seed: int, dt: float,
              ramp: RampSchedule, n_time_blocks: int) -> "EnsembleStats":
        n = spec.grid.n_modes
        nb = n_time_blocks
        return cls(
            spec=spec, master_seed=master_seed, dt=dt, ramp=ramp,
            n_time_blocks=nb,
            traj_ids=np.empty(0, np.int64),
            count=np.empty((0, nb), np.int64),
            sum_E=np.empty((0, nb, n), np.complex128),
            sum_absE2=np.empty((0, nb, n)),
            sum_Q=np.empty((0, nb, n), np.complex128),
            sum_absQ2=np.empty((0, nb, n)),
            quad0=np.empty((0, nb, 5)),
            aborted=np.empty(0, bool),
            abort_time=np.empty(0),
            abort_field=np.empty(0, np.int8),
            abort_mode=np.empty(0, np.int32),
        )

    # -- basic views ---------------------------------------------------

    @property
    def grid(self) -> ModeGrid:
        return self.spec.grid

    @property
    def n_modes(self) -> int:
        return self.spec.grid.n_modes

    @property
    def n_trajectories(self) -> int:
        return int(self.traj_ids.size)

    @property
    def active(self) -> np.ndarray:
        return ~self.aborted

    @property
    def total_count(self) -> int:
        return int(self.count[self.active].sum())

    def select(self, mask: np.ndarray) -> "EnsembleStats":
        """Sub-ensemble restricted to the masked trajectories."""
        return replace(
            self,
            traj_ids=self.traj_ids[mask].copy(),
            count=self.count[mask].copy(),
            sum_E=self.sum_E[mask].copy(),
            sum_absE2=self.sum_absE2[mask].copy(),
            sum_Q=self.sum_Q[mask].copy(),
            sum_absQ2=self.sum_absQ2[mask].copy(),
            quad0=self.quad0[mask].copy(),
            aborted=self.aborted[mask].copy(),
            abort_time=self.abort_time[mask].copy(),
            abort_field=self.abort_field[mask].copy(),
            abort_mode=self.abort_mode[mask].copy(),
        )

    # -- pooled estimators --------------------------------------------

    def _pooled(self, arr: np.ndarray) -> np.ndarray:
        return arr[self.active].sum(axis=(0, 1))

    @property
    def mean_E(self) -> np.ndarray:
        return self._pooled(self.sum_E) / self.total_count

    @property
    def mean_absE2(self) -> np.ndarray:
        return self._pooled(self.sum_absE2) / self.total_count

    @property
    def mean_Q(self) -> np.ndarray:
        return self._pooled(self.sum_Q) / self.total_count

    @property
    def mean_absQ2(self) -> np.ndarray:
        return self._pooled(self.sum_absQ2) / self.total_count

    @property
    def var_E(self) -> np.ndarray:
        mu = self.mean_E
        return self.mean_absE2 - (mu.real**2 + mu.imag**2)

    @property
    def var_Q(self) -> np.ndarray:
        mu = self.mean_Q
        return self.mean_absQ2 - (mu.real**2 + mu.imag**2)

    def quad_covariance(self) -> tuple[np.ndarray, np.ndarray]:
        """Mean vector and 2x2 covariance of the k=0 cavity quadratures."""
        c = self.total_count
        if c == 0:
            raise ValueError("empty quadrature accumulator")
        s = self._pooled(self.quad0)
        mx, my = s[0] / c, s[1] / c
        vxx = s[2] / c - mx * mx
        vyy = s[3] / c - my * my
        vxy = s[4] / c - mx * my
        return np.array([mx, my]), np.array([[vxx, vxy], [vxy, vyy]])

    # -- per-trajectory views for jackknife error analysis -------------

    def per_traj(self) -> dict:
        """Block-summed moment sums of the active trajectories."""
        act = self.active
        return {
            "traj_ids": self.traj_ids[act],
            "count": self.count[act].sum(axis=1),
            "sum_E": self.sum_E[act].sum(axis=1),
            "sum_absE2": self.sum_absE2[act].sum(axis=1),
            "sum_Q": self.sum_Q[act].sum(axis=1),
            "sum_absQ2": self.sum_absQ2[act].sum(axis=1),
            "quad0": self.quad0[act].sum(axis=1),
        }

    def per_block(self, scale: int = 1) -> dict:
        """Moment sums per (trajectory, coarse block of `scale` blocks)."""
        if self.n_time_blocks % scale != 0:
            raise ValueError(f"block scale {scale} does not divide {self.n_time_blocks}")
        act = self.active
        nb = self.n_time_blocks // scale

        def coarse(arr):
            a = arr[act]
            shape = (a.shape[0], nb, scale) + a.shape[2:]
            return a.reshape(shape).sum(axis=2).reshape((-1,) + a.shape[2:])

        return {
            "count": coarse(self.count),
            "sum_E": coarse(self.sum_E),
            "sum_absE2": coarse(self.sum_absE2),
            "sum_Q": coarse(self.sum_Q),
            "sum_absQ2": coarse(self.sum_absQ2),
        }

    def compatible_with(self, other: "EnsembleStats") -> list[str]:
        problems = []
        if self.spec != other.spec:
            problems.append("system specifications differ")
        if self.master_seed != other.master_seed:
            problems.append("master seeds differ")
        if self.dt != other.dt or self.ramp != other.ramp:
            problems.append("integration protocols differ")
        if self.n_time_blocks != other.n_time_blocks:
            problems.append("time-block layouts differ")
        return problems


def merge_stats(s1: EnsembleStats, s2: EnsembleStats) -> EnsembleStats:
    """Pool two disjoint accumulators of the same run family.

    Rows are re-sorted into trajectory order, so pooled moments are
    bitwise independent of the merge tree.
    """
    problems = s1.compatible_with(s2)
    if problems:
        raise StatsMergeError("; ".join(problems))
    if np.intersect1d(s1.traj_ids, s2.traj_ids).size:
        raise StatsMergeError("trajectory sets overlap")

    ids = np.concatenate([s1.traj_ids, s2.traj_ids])
    order = np.argsort(ids, kind="stable")

    def cat(a, b):
        return np.concatenate([a, b])[order]

    return replace(
        s1,
        traj_ids=ids[order],
        count=cat(s1.count, s2.count),
        sum_E=cat(s1.sum_E, s2.sum_E),
        sum_absE2=cat(s1.sum_absE2, s2.sum_absE2),
        sum_Q=cat(s1.sum_Q, s2.sum_Q),
        sum_absQ2=cat(s1.sum_absQ2, s2.sum_absQ2),
        quad0=cat(s1.quad0, s2.quad0),
        aborted=cat(s1.aborted, s2.aborted),
        abort_time=cat(s1.abort_time, s2.abort_time),
        abort_field=cat(s1.abort_field, s2.abort_field),
        abort_mode=cat(s1.abort_mode, s2.abort_mode),
    )


def sample_initial(spec: SystemSpec, rng) -> TrajectoryState:
    """Draw one Wigner sample of the uncoupled thermal/vacuum state.

    Each mode amplitude is an independent zero-mean complex Gaussian with
    E|z|^2 = coth(omega/2T)/2 (1/2 in vacuum).
    """
    n = spec.grid.n_modes
    std_a, std_b = initial_stds(spec)
    z = draw_normals(rng, 4 * n, PURPOSE_INIT)
    a = std_a * (z[:n] + 1j * z[n : 2 * n])
    b = std_b * (z[2 * n : 3 * n] + 1j * z[3 * n : 4 * n])
    return TrajectoryState(a=a, b=b, t=0.0)


def _run_python_engine(spec, protocol, timing, block_of_sample):
    """Pure-Python reference runner (slow; used for kernel validation)."""
    n = spec.grid.n_modes
    n_traj = protocol.n_trajectories
    nb = timing.n_time_blocks
    out = {
        "sum_E": np.zeros((n_traj, nb, n), np.complex128),
        "sum_absE2": np.zeros((n_traj, nb, n)),
        "sum_Q": np.zeros((n_traj, nb, n), np.complex128),
        "sum_absQ2": np.zeros((n_traj, nb, n)),
        "quad0": np.zeros((n_traj, nb, 5)),
        "count": np.zeros((n_traj, nb), np.int64),
        "aborted": np.zeros(n_traj, np.uint8),
        "abort_time": np.zeros(n_traj),
        "abort_field": np.full(n_traj, -1, np.int8),
        "abort_mode": np.zeros(n_traj, np.int32),
    }
    m = spec.grid.half_width
    field_code = {"a": 0, "b": 1}
    for i in range(n_traj):
        stream = TrajectoryStream(protocol.master_seed, i)
        state = sample_initial(spec, stream)
        sample_idx = 0
        for s in range(timing.n_steps):
            if (sample_idx < timing.n_samples and s >= timing.sample_start
                    and (s - timing.sample_start) % timing.stride_steps == 0):
                tb = block_of_sample[sample_idx]
                e = hermitian_field(state.a)
                q = hermitian_field(state.b)
                out["sum_E"][i, tb] += e
                out["sum_absE2"][i, tb] += e.real**2 + e.imag**2
                out["sum_Q"][i, tb] += q
                out["sum_absQ2"][i, tb] += q.real**2 + q.imag**2
                x, y = state.a[m].real, state.a[m].imag
                out["quad0"][i, tb] += (x, y, x * x, y * y, x * y)
                out["count"][i, tb] += 1
                sample_idx += 1
            try:
                state = step(state, spec, protocol.ramp, protocol.dt, stream)
            except TrajectoryAbortError as err:
                out["aborted"][i] = 1
                out["abort_time"][i] = err.t
                out["abort_field"][i] = field_code[err.field]
                out["abort_mode"][i] = err.mode
                for name in ("sum_E", "sum_absE2", "sum_Q", "sum_absQ2", "quad0"):
                    out[name][i] = 0
                out["count"][i] = 0
                break
    return out


def run_ensemble(spec: SystemSpec, protocol: RunProtocol,
                 engine: str = "numba") -> EnsembleStats:
    """Integrate a full trajectory ensemble and pool its statistics.

    Deterministic for fixed (master_seed, n_trajectories): bitwise
    identical results regardless of worker count.  Raises EnsembleRunError
    if more than 0.1% of trajectories abort on non-finite amplitudes.
    """
    validate_spec(spec)
    timing = ProtocolTiming.build(protocol.ramp, protocol.dt, protocol.time_blocks)
    block_of_sample = timing.block_of_sample()
    grid = spec.grid
    omega_c = spec.cavity_disp.table(grid)
    omega_r = spec.raman_disp.table(grid)
    amp_a, amp_b = noise_amplitudes(spec, protocol.dt)
    init_a, init_b = initial_stds(spec)
    n = grid.n_modes

    if engine == "python":
        out = _run_python_engine(spec, protocol, timing, block_of_sample)
    elif engine == "numba":
        from .kernel import integrate_ensemble

        r_mid = timing.ramp_midpoints(protocol.ramp, protocol.dt)
        out = integrate_ensemble(
            protocol.n_trajectories, protocol.master_seed,
            1 if grid.wrap_policy is WrapPolicy.WRAP else 0,
            omega_c, omega_r,
            spec.g / math.sqrt(n), spec.g4 / n, spec.kappa, spec.gamma,
            amp_a, amp_b, init_a, init_b, protocol.dt, r_mid,
            timing.sample_start, timing.stride_steps, timing.n_samples,
            block_of_sample, timing.n_time_blocks)
    else:
        raise ValueError(f"unknown engine '{engine}'")

    aborted = out["aborted"].astype(bool)
    n_aborted = int(aborted.sum())
    if n_aborted > ABORT_FRACTION_LIMIT * protocol.n_trajectories:
        details = [
            (int(i), float(out["abort_time"][i]),
             "a" if out["abort_field"][i] == 0 else "b", int(out["abort_mode"][i]))
            for i in np.nonzero(aborted)[0]
        ]
        raise EnsembleRunError(n_aborted, protocol.n_trajectories, details)

    return EnsembleStats(
        spec=spec,
        master_seed=protocol.master_seed,
        dt=protocol.dt,
        ramp=protocol.ramp,
        n_time_blocks=timing.n_time_blocks,
        traj_ids=np.arange(protocol.n_trajectories, dtype=np.int64),
        count=out["count"],
        sum_E=out["sum_E"],
        sum_absE2=out["sum_absE2"],
        sum_Q=out["sum_Q"],
        sum_absQ2=out["sum_absQ2"],
        quad0=out["quad0"],
        aborted=aborted,
        abort_time=out["abort_time"],
        abort_field=out["abort_field"],
        abort_mode=out["abort_mode"],
    )


def run_with_baseline(spec: SystemSpec, protocol: RunProtocol,
                      engine: str = "numba") -> tuple[EnsembleStats, EnsembleStats]:
    """Coupled run plus its seed-paired uncoupled reference run."""
    coupled = run_ensemble(spec, protocol, engine=engine)
    baseline = run_ensemble(spec.uncoupled(), protocol, engine=engine)
    return coupled, baseline
