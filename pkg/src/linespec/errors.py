"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes, so new error types should
subclass one of the three top-level categories (config, data, solver).
"""


class LineSpecError(Exception):
    """Base class for all package errors."""


class ConfigError(LineSpecError):
    """Invalid configuration, arguments, or parameter combination."""


class DataFormatError(LineSpecError):
    """Malformed or inconsistent input data (files, matrices, signals)."""


class DimensionError(ConfigError):
    """Array shapes incompatible with the requested operation."""


class SymmetryError(ConfigError):
    """Matrix expected to be Hermitian is not, beyond tolerance."""


class StabilityError(ConfigError):
    """State matrix is not Schur stable (spectral radius >= 1)."""


class NotPsdError(ConfigError):
    """Matrix expected to be positive semidefinite has a clearly negative eigenvalue."""


class ConditioningError(LineSpecError):
    """A computation failed because the problem is numerically singular."""


class InsufficientDataError(DataFormatError):
    """Signal too short for the requested transient truncation."""

    def __init__(self, message, required_length=None):
        super().__init__(message)
        self.required_length = required_length


class SolverFailure(LineSpecError):
    """Numerical breakdown inside the SDP solver.

    Carries the iterate norms observed at the point of failure for
    diagnostic purposes.
    """

    def __init__(self, message, iterate_norms=None):
        super().__init__(message)
        self.iterate_norms = iterate_norms or {}


class FullRankError(LineSpecError):
    """Covariance has full numerical rank; no line spectrum can be extracted."""


class EstimationStageError(LineSpecError):
    """Failure inside the estimation pipeline, tagged with the stage name."""

    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
