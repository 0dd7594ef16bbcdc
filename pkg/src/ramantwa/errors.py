"""Exception types shared across the package."""


class RamanTwaError(Exception):
    """Base class for all package errors."""


class SpecValidationError(RamanTwaError):
    """A system specification violates one or more invariants.

    `violations` is a list of human-readable messages, each naming the
    offending field.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class GridIndexError(RamanTwaError, IndexError):
    """A mode index lies outside the momentum grid."""


class TrajectoryAbortError(RamanTwaError):
    """A trajectory produced a non-finite amplitude.

    Carries the time and the (field, mode) location of the first bad entry.
    """

    def __init__(self, t, field, mode):
        self.t = t
        self.field = field
        self.mode = mode
        super().__init__(
            f"non-finite amplitude in field '{field}' at mode k={mode}, t={t:.6g}"
        )


class EnsembleRunError(RamanTwaError):
    """Too many trajectories aborted for the ensemble to be trusted."""

    def __init__(self, n_aborted, n_total, details):
        self.n_aborted = n_aborted
        self.n_total = n_total
        self.details = details
        super().__init__(
            f"{n_aborted}/{n_total} trajectories aborted "
            f"(limit is 0.1%); first failures: {details[:3]}"
        )


class StatsMergeError(RamanTwaError):
    """Two statistics accumulators are incompatible (grid or metadata)."""


class BaselineError(RamanTwaError):
    """A reference (g=0) run is unusable as a normalization baseline."""


class ConfigError(RamanTwaError):
    """A run configuration file or override is malformed."""
