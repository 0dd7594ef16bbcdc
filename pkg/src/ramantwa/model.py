"""Physical system definition: momentum grid, band dispersions, couplings,
baths, and the coupling ramp schedule.

Everything is expressed in natural units hbar = 1, omega0_R = 1 (the flat
Raman band frequency): frequencies, decay rates and couplings are
dimensionless, times are in 1/omega0_R, and temperature is kT/(hbar
omega0_R).  All types are immutable after construction and safe to share
across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import GridIndexError, SpecValidationError


class WrapPolicy(Enum):
    """Treatment of momentum sums that leave the finite grid.

    WRAP folds indices back periodically (Brillouin-zone style); TRUNCATE
    drops any term containing an out-of-range mode index.
    """

    WRAP = "wrap"
    TRUNCATE = "truncate"


class DispersionKind(Enum):
    FLAT = "flat"
    QUADRATIC = "quadratic"


class RampShape(Enum):
    LINEAR = "linear"
    SMOOTH_TANH = "smooth_tanh"


@dataclass(frozen=True)
class ModeGrid:
    """Symmetric 1-D momentum grid {-M, ..., 0, ..., +M} with N = 2M+1 modes."""

    half_width: int
    wrap_policy: WrapPolicy = WrapPolicy.WRAP

    @property
    def n_modes(self) -> int:
        return 2 * self.half_width + 1

    def indices(self) -> np.ndarray:
        """Mode indices in ascending order, -M..+M."""
        return np.arange(-self.half_width, self.half_width + 1)

    def contains(self, k: int) -> bool:
        return -self.half_width <= k <= self.half_width

    def array_index(self, k: int) -> int:
        """Position of mode k in an amplitude vector ordered -M..+M."""
        if not self.contains(k):
            raise GridIndexError(f"mode index k={k} outside grid |k| <= {self.half_width}")
        return k + self.half_width


@dataclass(frozen=True)
class Dispersion:
    """Band dispersion omega(k) on a ModeGrid.

    FLAT:      omega(k) = omega0.
    QUADRATIC: omega(k) = omega0 + bandwidth * (k/M)^2, so that
               omega(+-M) - omega(0) = bandwidth exactly.
    """

    kind: DispersionKind
    omega0: float
    bandwidth: float = 0.0

    def evaluate(self, grid: ModeGrid, k: int) -> float:
        if not grid.contains(k):
            raise GridIndexError(f"mode index k={k} outside grid |k| <= {grid.half_width}")
        if self.kind is DispersionKind.FLAT or k == 0:
            return float(self.omega0)
        return float(self.omega0 + self.bandwidth * (k / grid.half_width) ** 2)

    def table(self, grid: ModeGrid) -> np.ndarray:
        """omega(k) for every grid index, ordered -M..+M."""
        return np.array([self.evaluate(grid, int(k)) for k in grid.indices()])


def dispersion_eval(d: Dispersion, grid: ModeGrid, k: int) -> float:
    """Angular frequency of mode k; pure function of its arguments."""
    return d.evaluate(grid, k)


@dataclass(frozen=True)
class SystemSpec:
    """Full physical configuration of the Raman-cavity hybrid."""

    grid: ModeGrid
    cavity_disp: Dispersion
    raman_disp: Dispersion
    g: float
    g4: float
    kappa: float
    gamma: float
    temperature: float = 0.0

    def uncoupled(self) -> "SystemSpec":
        """The free-field reference system (both couplings removed)."""
        return replace(self, g=0.0, g4=0.0)

    def with_bandgap(self, omega0c: float) -> "SystemSpec":
        """Same system with the photonic band minimum moved to omega0c."""
        return replace(self, cavity_disp=replace(self.cavity_disp, omega0=omega0c))


@dataclass(frozen=True)
class RampSchedule:
    """Coupling turn-on protocol and steady-state sampling window.

    The ramp factor r(t) multiplies both g and g4; it rises monotonically
    from r(0)=0 to r(t_ramp)=1, the system then settles for t_settle, and
    field samples are recorded every sample_stride across t_window.
    """

    shape: RampShape = RampShape.SMOOTH_TANH
    t_ramp: float = 600.0
    t_settle: float = 200.0
    t_window: float = 200.0
    sample_stride: float = 1.0

    # steepness of the tanh profile; tanh(+-_TANH_SCALE/2) is the raw edge
    # value before renormalizing to exact 0/1 endpoints
    _TANH_SCALE = 6.0

    def __post_init__(self):
        problems = []
        for name in ("t_ramp", "t_settle", "t_window", "sample_stride"):
            if not getattr(self, name) > 0:
                problems.append(f"{name} must be positive")
        if self.sample_stride > self.t_window:
            problems.append("sample_stride must not exceed t_window")
        if problems:
            raise SpecValidationError(problems)

    @property
    def t_total(self) -> float:
        return self.t_ramp + self.t_settle + self.t_window

    @property
    def t_sample_start(self) -> float:
        return self.t_ramp + self.t_settle

    def factor(self, t: float) -> float:
        """Ramp factor r(t): 0 at t<=0, 1 at t>=t_ramp, monotone between."""
        if t <= 0.0:
            return 0.0
        if t >= self.t_ramp:
            return 1.0
        u = t / self.t_ramp
        if self.shape is RampShape.LINEAR:
            return u
        s = self._TANH_SCALE
        raw = math.tanh(s * (u - 0.5))
        lo = math.tanh(-0.5 * s)
        hi = math.tanh(0.5 * s)
        return (raw - lo) / (hi - lo)


def bose_occupation(omega: float, temperature: float) -> float:
    """Mean thermal occupation n(omega) at dimensionless temperature T."""
    if temperature <= 0.0:
        return 0.0
    return 1.0 / math.expm1(omega / temperature)


def thermal_weight(omega: float, temperature: float) -> float:
    """2 n(omega) + 1 = coth(omega / 2T); equals 1 in vacuum."""
    return 2.0 * bose_occupation(omega, temperature) + 1.0


def validate_spec(spec: SystemSpec) -> SystemSpec:
    """Check every SystemSpec invariant; return the spec unchanged if valid.

    Raises SpecValidationError carrying the full list of violations, each
    naming the offending field.  Validation is pure: it never mutates the
    spec and is idempotent.
    """
    problems = []

    grid = spec.grid
    if not isinstance(grid.half_width, (int, np.integer)) or isinstance(grid.half_width, bool):
        problems.append("grid.half_width must be an integer")
    elif grid.half_width < 0:
        problems.append("grid.half_width must be >= 0")
    if not isinstance(grid.wrap_policy, WrapPolicy):
        problems.append("grid.wrap_policy must be a WrapPolicy")

    if not problems:
        for name, disp in (("cavity_disp", spec.cavity_disp), ("raman_disp", spec.raman_disp)):
            if not isinstance(disp.kind, DispersionKind):
                problems.append(f"{name}.kind must be a DispersionKind")
                continue
            omegas = disp.table(grid)
            if not np.all(omegas > 0.0):
                problems.append(f"{name}: omega(k) must be positive for every grid index")

    if spec.g < 0:
        problems.append("g must be nonnegative")
    if spec.g4 < 0:
        problems.append("g4 must be nonnegative")
    if not spec.kappa > 0:
        problems.append("kappa must be positive")
    if not spec.gamma > 0:
        problems.append("gamma must be positive")
    if spec.temperature < 0:
        problems.append("temperature must be nonnegative")

    if problems:
        raise SpecValidationError(problems)
    return spec
