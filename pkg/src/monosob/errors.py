"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the range where a quantity is defined."""


class DivergenceError(ValueError):
    """A requested integral is infinite for the given function or parameters."""


class SingularPointError(ValueError):
    """A function was evaluated on its declared singular set."""


class QuadratureAccuracyError(RuntimeError):
    """Quadrature did not reach the requested tolerance.

    The best available estimate travels with the exception so callers can
    still report something.
    """

    def __init__(self, message, value=float("nan"), error=float("inf")):
        super().__init__(message)
        self.value = value
        self.error = error


class UnsupportedDimensionError(ValueError):
    """Generic cubature was requested above the configured dimension cap."""
