"""Parameter and domain exception classes."""

from typing import List, Optional

from .base import ForkGameException


class InvalidParamsError(ForkGameException):
    """Raised when game or graph parameters violate their invariants."""

    def __init__(self, message: str = "Invalid parameters", violations: Optional[List[str]] = None):
        self.violations = violations or []
        super().__init__(message, "INVALID_PARAMS")


class DomainError(ForkGameException):
    """Raised when a formula is evaluated outside its domain."""

    def __init__(self, message: str = "Input outside formula domain"):
        super().__init__(message, "DOMAIN_ERROR")
