"""Trajectory-ensemble truncated-Wigner simulator for multimode
Raman-cavity hybrids.

The package integrates coupled cavity/Raman Langevin field equations over
Wigner-sampled trajectory ensembles, sweeps the photonic bandgap across
engineered photon/phonon dispersions, and reports mode-resolved
fluctuation amplification, squeezing and Raman-shift observables.
"""

__version__ = "0.1.0"

from .dynamics import NoiseIncrement, TrajectoryState, drift, noise_increment, step
from .ensemble import (
    EnsembleStats,
    RunProtocol,
    merge_stats,
    run_ensemble,
    run_with_baseline,
    sample_initial,
)
from .errors import (
    BaselineError,
    ConfigError,
    EnsembleRunError,
    GridIndexError,
    RamanTwaError,
    SpecValidationError,
    StatsMergeError,
    TrajectoryAbortError,
)
from .model import (
    Dispersion,
    DispersionKind,
    ModeGrid,
    RampSchedule,
    RampShape,
    SystemSpec,
    WrapPolicy,
    dispersion_eval,
    validate_spec,
)
from .observables import (
    RamanShiftReport,
    SqueezingReport,
    ThermalReport,
    VarianceReport,
    delta_variances,
    raman_shift,
    squeezing_scan,
    thermal_deltas,
)
from .sweep import (
    ComparisonRow,
    ResonanceLine,
    Scenario,
    SweepResult,
    SweepRow,
    compare_effective,
    resonance_lines,
    run_point,
    run_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
