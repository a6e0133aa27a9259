"""Exception types shared across the package."""


class CarmaError(Exception):
    """Base class for errors raised by this package."""


class ModelStructureError(CarmaError, ValueError):
    """Model orders or coefficients are structurally malformed."""


class DistinctRootsRequired(CarmaError):
    """A closed-form routine needs distinct autoregressive roots."""


class InvalidCovariance(CarmaError):
    """A covariance sequence is not nonnegative definite."""


class NonInvertibleLimit(CarmaError):
    """A spectral factor has a root too close to the unit circle."""


class NonInvertibleModel(CarmaError):
    """The operation requires an invertible model or representation."""


class UnsupportedOrder(CarmaError):
    """No closed form is implemented for the requested order."""


class InternalConsistencyError(CarmaError):
    """A numerical self-check failed; the result cannot be trusted."""


class ConfigError(CarmaError, ValueError):
    """An experiment configuration is malformed."""
