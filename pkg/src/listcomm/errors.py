"""Exception types shared across the package."""


class ListCommError(Exception):
    """Base class for all package errors."""


class ValidationError(ListCommError, ValueError):
    """Malformed or out-of-range input."""


class DomainError(ListCommError, ValueError):
    """Argument outside the domain where a formula is defined."""


class GuardExceeded(ListCommError, RuntimeError):
    """Requested computation is larger than the desk-scale guard allows."""


class ConvergenceError(ListCommError, RuntimeError):
    """Iterative solver hit its iteration cap.

    The best bounds reached are kept on the instance.
    """

    def __init__(self, message: str, lower: float, upper: float, iterations: int):
        super().__init__(message)
        self.lower = lower
        self.upper = upper
        self.iterations = iterations
