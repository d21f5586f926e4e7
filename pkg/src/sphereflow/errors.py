"""Exception types shared across the package."""


class CutLocusError(ValueError):
    """Raised when two points are (numerically) antipodal."""


class NotPositiveSemidefiniteError(ValueError):
    """Raised when a kernel has a clearly negative spectral coefficient."""


class ParameterRangeError(ValueError):
    """Raised when a scale parameter is outside the supported range."""


class UnsupportedDimensionError(ValueError):
    """Raised when an operation is only implemented for some sphere dimensions."""


class EntropyUndefinedError(ValueError):
    """Raised when the entropy of a density with nonpositive values is requested."""


class SolverInstabilityError(RuntimeError):
    """Raised when time stepping fails even after step-size reduction.

    Attributes
    ----------
    last_time : float
        Time of the last accepted step.
    partial : object or None
        Whatever the solver managed to produce before failing.
    """

    def __init__(self, message, last_time=0.0, partial=None):
        super().__init__(message)
        self.last_time = last_time
        self.partial = partial
