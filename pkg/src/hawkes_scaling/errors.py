"""Exception hierarchy shared by every module of the package."""


class HawkesError(Exception):
    """Base class for all package errors."""


class StabilityError(HawkesError):
    """Raised when the kernel matrix is not strictly subcritical."""

    def __init__(self, message, spectral_radius=None):
        if spectral_radius is not None:
            message = f"{message} (spectral radius = {spectral_radius:.12g})"
        super().__init__(message)
        self.spectral_radius = spectral_radius


class IntegrabilityError(HawkesError):
    """A kernel integral is not finite."""


class SpectralRadiusError(HawkesError):
    """Power iteration did not converge."""

    def __init__(self, message, last_iterate=None, last_estimate=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.last_estimate = last_estimate


class GridError(HawkesError):
    """Two sampled functions live on incompatible grids."""


class ResolutionError(HawkesError):
    """The sampling scale is too fine for the tabulation step."""


class TruncationError(HawkesError):
    """A quantity was requested beyond the tabulated horizon."""


class ExplosionError(HawkesError):
    """The simulator hit its event cap."""

    def __init__(self, message, spectral_radius=None):
        if spectral_radius is not None:
            message = f"{message}; spectral radius of K = {spectral_radius:.6g}"
        super().__init__(message)
        self.spectral_radius = spectral_radius


class DataCoverageError(HawkesError):
    """An estimator needs event data beyond the stream horizon."""

    def __init__(self, message, required_horizon=None):
        super().__init__(message)
        self.required_horizon = required_horizon


class ConfigError(HawkesError):
    """Malformed model or run configuration."""
