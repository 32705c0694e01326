"""Exception types shared across the package."""


class DomainError(ValueError):
    """Raised when an input violates a documented precondition."""


class NumericalError(RuntimeError):
    """Raised when a computation cannot reach its accuracy contract."""
