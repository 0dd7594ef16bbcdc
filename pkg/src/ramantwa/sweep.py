"""Photonic-bandgap sweeps over the study scenarios.

A sweep runs, for every bandgap value, a coupled ensemble plus its
seed-paired uncoupled reference, computes all reported observables, and
assembles one row per (scenario, bandgap, nonnegative mode).  Scenario
presets are configuration data (see `presets/`); this module only knows
how to execute a template whose photonic band minimum is left free.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensemble import EnsembleStats, RunProtocol, run_ensemble
from .errors import EnsembleRunError, RamanTwaError
from .model import DispersionKind, ModeGrid, SystemSpec, validate_spec
from .observables import (
    delta_variances,
    raman_shift,
    squeezing_scan,
    thermal_deltas,
)

SCENARIO_NAMES = (
    "flatflat",
    "quadraman",
    "quadcavity",
    "thermalflatflat",
    "singlemode_ref",
    "singlemode_eff",
)


@dataclass(frozen=True)
class Scenario:
    """A named system template with the photonic bandgap left free."""

    name: str
    template: SystemSpec

    def spec_at(self, omega0c: float) -> SystemSpec:
        return validate_spec(self.template.with_bandgap(float(omega0c)))


@dataclass(frozen=True)
class ResonanceLine:
    """A dashed-line annotation: either a per-mode two-photon resonance
    or the threshold bandgap above which no resonance exists."""

    kind: str  # "resonance" | "threshold"
    k: int | None
    omega0c: float


def resonance_lines(scenario: Scenario, grid: ModeGrid) -> list[ResonanceLine]:
    """Bandgap values where two cavity quanta match one Raman quantum.

    Flat Raman band with dispersive cavity: a single threshold at
    omega0_R/2.  Dispersive Raman band: one line per mode at omega_k^R/2.
    """
    raman = scenario.template.raman_disp
    if raman.kind is DispersionKind.QUADRATIC and raman.bandwidth != 0.0:
        return [
            ResonanceLine("resonance", k, raman.evaluate(grid, k) / 2.0)
            for k in range(grid.half_width + 1)
        ]
    if scenario.template.cavity_disp.kind is DispersionKind.QUADRATIC:
        return [ResonanceLine("threshold", None, raman.omega0 / 2.0)]
    return [ResonanceLine("resonance", None, raman.omega0 / 2.0)]


@dataclass
class SweepRow:
    """One (scenario, bandgap, mode) record.

    The leading fields mirror the CSV schema; the trailing *_err fields
    for the absolute variances are carried for in-process analysis only
    (the file schema is fixed).
    """

    scenario: str
    omega0c: float
    k: int
    dV_E: float = None
    dV_E_err: float = None
    dV_Q: float = None
    dV_Q_err: float = None
    V_E_g: float = None
    V_E_0: float = None
    V_Q_g: float = None
    V_Q_0: float = None
    dV_E_th: float = None
    dV_Q_th: float = None
    dVp_Q_th: float = None
    mean_Q_re: float = None
    mean_Q_err: float = None
    theta_min: float = None
    V_min: float = None
    V_max: float = None
    annotation: str = ""
    V_E_g_err: float = None
    V_E_0_err: float = None
    V_Q_g_err: float = None
    V_Q_0_err: float = None


@dataclass
class SweepResult:
    """All rows of one scenario sweep plus reproducibility metadata."""

    scenario: str
    bandgap_grid: np.ndarray
    protocol: RunProtocol
    rows: list[SweepRow] = field(default_factory=list)
    point_errors: list[tuple[float, str]] = field(default_factory=list)
    abort_counts: dict[float, int] = field(default_factory=dict)

    @property
    def n_aborted(self) -> int:
        return sum(self.abort_counts.values())

    def rows_at(self, omega0c: float) -> list[SweepRow]:
        return [r for r in self.rows if r.omega0c == omega0c]

    def mode_series(self, field_name: str, k: int) -> np.ndarray:
        """One mode's column across the bandgap grid (NaN where missing)."""
        vals = [getattr(r, field_name) for r in self.rows if r.k == k]
        return np.array([np.nan if v is None else v for v in vals])


def _point_annotation(scenario: Scenario, lines: list[ResonanceLine],
                      omega0c: float, k: int) -> str:
    tags = []
    for line in lines:
        if line.kind == "threshold":
            tags.append(f"threshold={line.omega0c:.9g}")
            if omega0c > line.omega0c:
                tags.append("nonresonant")
        elif line.k is None or line.k == k:
            tags.append(f"resonance={line.omega0c:.9g}")
    return ";".join(tags)


def run_point(scenario: Scenario, omega0c: float, protocol: RunProtocol,
              engine: str = "numba") -> tuple[list[SweepRow], int,
                                              EnsembleStats, EnsembleStats]:
    """Run one bandgap point: coupled + paired baseline + observables."""
    spec = scenario.spec_at(omega0c)
    coupled = run_ensemble(spec, protocol, engine=engine)
    baseline = run_ensemble(spec.uncoupled(), protocol, engine=engine)
    n_aborted = int(coupled.aborted.sum()) + int(baseline.aborted.sum())

    report = delta_variances(coupled, baseline)
    thermal = None
    if spec.temperature > 0.0:
        thermal = thermal_deltas(coupled, baseline)
    squeeze = squeezing_scan(coupled)
    shift = raman_shift(coupled)
    lines = resonance_lines(scenario, spec.grid)

    rows = []
    for i, k in enumerate(report.k):
        row = SweepRow(
            scenario=scenario.name, omega0c=float(omega0c), k=int(k),
            dV_E=float(report.delta_e[i]), dV_E_err=float(report.delta_e_err[i]),
            dV_Q=float(report.delta_q[i]), dV_Q_err=float(report.delta_q_err[i]),
            V_E_g=float(report.v_e_g[i]), V_E_0=float(report.v_e_0[i]),
            V_Q_g=float(report.v_q_g[i]), V_Q_0=float(report.v_q_0[i]),
            mean_Q_re=float(shift.shift[i]), mean_Q_err=float(shift.shift_err[i]),
            annotation=_point_annotation(scenario, lines, float(omega0c), int(k)),
            V_E_g_err=float(report.v_e_g_err[i]), V_E_0_err=float(report.v_e_0_err[i]),
            V_Q_g_err=float(report.v_q_g_err[i]), V_Q_0_err=float(report.v_q_0_err[i]),
        )
        if thermal is not None:
            row.dV_E_th = float(thermal.delta_e_th[i])
            row.dV_Q_th = float(thermal.delta_q_th[i])
            row.dVp_Q_th = float(thermal.delta_qp_th[i])
        if k == 0:
            row.theta_min = squeeze.theta_min
            row.V_min = squeeze.v_min
            row.V_max = squeeze.v_max
        rows.append(row)
    return rows, n_aborted, coupled, baseline


def run_sweep(scenario: Scenario, bandgap_grid, protocol: RunProtocol,
              engine: str = "numba") -> SweepResult:
    """Sweep the photonic bandgap across its grid.

    Single-point failures are recorded and the sweep continues; results
    are emitted in bandgap order regardless of execution details.
    """
    grid = np.asarray(bandgap_grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("bandgap grid must be strictly increasing and positive")

    result = SweepResult(scenario=scenario.name, bandgap_grid=grid, protocol=protocol)
    for omega0c in grid:
        try:
            rows, n_aborted, _, _ = run_point(scenario, omega0c, protocol, engine=engine)
        except (EnsembleRunError, RamanTwaError) as err:
            result.point_errors.append((float(omega0c), str(err)))
            continue
        result.rows.extend(rows)
        result.abort_counts[float(omega0c)] = n_aborted
    return result


@dataclass(frozen=True)
class ComparisonRow:
    omega0c: float
    max_diff_e: float
    pooled_err_e: float
    max_diff_q: float
    pooled_err_q: float


def compare_effective(multi: SweepResult, eff: SweepResult) -> list[ComparisonRow]:
    """Worst per-mode disagreement between two sweeps, bandgap by bandgap.

    When `eff` is a single-mode sweep its k=0 curve is compared against
    every mode of `multi`; otherwise modes are compared one-to-one.
    Pooled errors are taken at the maximizing mode.
    """
    if multi.bandgap_grid.shape != eff.bandgap_grid.shape or \
            not np.allclose(multi.bandgap_grid, eff.bandgap_grid):
        raise ValueError("sweeps were run on different bandgap grids")

    out = []
    for omega0c in multi.bandgap_grid:
        rows_m = multi.rows_at(float(omega0c))
        rows_e = eff.rows_at(float(omega0c))
        if not rows_m or not rows_e:
            continue
        single = len(rows_e) == 1

        def worst(attr, err_attr):
            best = None
            for i, rm in enumerate(rows_m):
                re_ = rows_e[0] if single else rows_e[i]
                diff = abs(getattr(rm, attr) - getattr(re_, attr))
                err = float(np.hypot(getattr(rm, err_attr), getattr(re_, err_attr)))
                if best is None or diff > best[0]:
                    best = (diff, err)
            return best

        de, ee = worst("dV_E", "dV_E_err")
        dq, eq = worst("dV_Q", "dV_Q_err")
        out.append(ComparisonRow(float(omega0c), de, ee, dq, eq))
    return out
