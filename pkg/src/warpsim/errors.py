"""Exception hierarchy shared by every module."""


class WarpError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(WarpError, ValueError):
    """A parameter violates its documented precondition."""


class DomainError(WarpError, ValueError):
    """An evaluation point lies outside [0, 1]."""


class InvalidElementError(WarpError, ValueError):
    """A warp cannot be treated as an element of the smooth warp group."""


class SamplingError(WarpError, RuntimeError):
    """A sampler could not produce a valid draw."""


class AccuracyError(WarpError, RuntimeError):
    """Quadrature did not reach its error target.

    Attributes
    ----------
    estimate : float
        Best value obtained before giving up.
    achieved : float
        Error estimate attached to ``estimate``.
    """

    def __init__(self, message, estimate=float("nan"), achieved=float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.achieved = achieved


class UnsupportedParameterError(WarpError, ValueError):
    """Parameter is valid in principle but outside the supported range."""


class DegenerateWarpError(WarpError, ValueError):
    """A warp would be constant, so it cannot be rescaled."""


class DegenerateEstimateError(WarpError, ValueError):
    """An estimator has a zero denominator."""


class InsufficientSampleError(WarpError, ValueError):
    """Too few replicates for the requested statistic."""


class IngestionError(WarpError, OSError):
    """Input data could not be read or contained no usable rows."""
