"""Exception types raised across the package."""


class MimoDoaError(Exception):
    """Base class for all package errors."""


class EmptySelection(MimoDoaError):
    """A subarray selector matched fewer than two elements."""


class DomainError(MimoDoaError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class ConfigMismatch(MimoDoaError, ValueError):
    """Waveform configuration and array geometry disagree."""


class BadLength(MimoDoaError, ValueError):
    """FFT length or input length is not acceptable."""


class NonUniformSubarray(MimoDoaError, ValueError):
    """A uniform subarray was required but spacing varies."""


class DimensionMismatch(MimoDoaError, ValueError):
    """Data and dictionary dimensions disagree."""


class RankError(MimoDoaError, ValueError):
    """Requested source count leaves no noise subspace."""


class ConvergenceError(MimoDoaError, RuntimeError):
    """An eigensolver failed to converge."""


class SolverDiverged(MimoDoaError, RuntimeError):
    """The square-root LASSO objective increased between iterations."""


class FormatError(MimoDoaError, ValueError):
    """A cube file is malformed."""


class ConfigError(MimoDoaError, ValueError):
    """A scenario configuration is invalid.

    Attributes:
        field: Dotted path of the offending field, e.g. ``scene.targets[1].range_m``.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
