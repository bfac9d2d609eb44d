class ConfigurationError(ValueError):
    """Inconsistent model, contract or run configuration."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a routine."""


class PreconditionError(ValueError):
    """A documented precondition of an operation does not hold."""


class NumericalError(ArithmeticError):
    """A numerical routine failed to reach its tolerance."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class DimensionError(ValueError):
    """A moment sequence is too short for the requested matrix order."""
