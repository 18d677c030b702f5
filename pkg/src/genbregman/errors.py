"""Exception hierarchy shared by all modules."""


class BregmanError(Exception):
    """Base class for library errors."""


class DimensionError(BregmanError, ValueError):
    pass


class DomainError(BregmanError, ValueError):
    """A point lies outside the set where the requested quantity is defined."""


class ValidationError(BregmanError, ValueError):
    """Invalid parameters, tables or constraint descriptions."""


class InfeasibleError(BregmanError):
    """A constraint set misses the interior of the potential's domain."""


class ConvergenceError(BregmanError):
    """Iterative solver hit its cap. ``best`` holds the last good iterate."""

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class DegeneracyError(BregmanError):
    """Metric estimate is not positive definite."""
