"""Transaction-graph exception classes."""

from typing import Optional

from .base import ForkGameException


class ConflictViolationError(ForkGameException):
    """Raised when two confirmations spend the same output."""

    def __init__(self, message: str = "Output already spent"):
        super().__init__(message, "CONFLICT_VIOLATION")


class ConditionViolationError(ForkGameException):
    """Raised when a spend does not satisfy its output condition."""

    def __init__(self, message: str = "Spending condition not satisfied", condition: Optional[str] = None):
        self.condition = condition
        super().__init__(message, "CONDITION_VIOLATION")
