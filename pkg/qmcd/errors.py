"""Exception hierarchy shared by every qmcd service."""

from typing import Any, Optional


class QmcdError(Exception):
    """Base class for all library failures (CLI exit code 2)."""


class InvalidArgumentError(QmcdError, ValueError):
    pass


class UnsupportedDimensionError(InvalidArgumentError):
    pass


class InvalidParameterError(QmcdError, ValueError):
    """θ lies outside the generator's admissible set."""


class InputDimensionError(InvalidArgumentError, InvalidParameterError):
    """θ reads more point-set columns than the point set has, or a different column layout."""


class DomainError(QmcdError, ValueError):
    pass


class BudgetExceededError(QmcdError):
    """A solver budget was exceeded; `partial_result` holds what was computed before stopping."""

    def __init__(self, message: str, budget: int, partial_result: Optional[float] = None):
        super().__init__(message)
        self.budget = budget
        self.partial_result = partial_result

    @property
    def is_partial(self) -> bool:
        return self.partial_result is not None


class InsufficientDataError(QmcdError):
    pass


class SinkhornNotConvergedError(QmcdError):
    def __init__(self, message: str, results: Any = None):
        super().__init__(message)
        self.results = results


class UsageError(Exception):
    """Command-line usage problem (CLI exit code 1)."""
