"""Data ingestion exception classes."""

from typing import Optional

from .base import ForkGameException


class ParseError(ForkGameException):
    """Raised when a data row cannot be parsed."""

    def __init__(self, message: str = "Failed to parse input", line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, "PARSE_ERROR")


class SchemaError(ForkGameException):
    """Raised when an input file does not match the documented schema."""

    def __init__(self, message: str = "Input does not match schema"):
        super().__init__(message, "SCHEMA_ERROR")


class EmptyInputError(ForkGameException):
    """Raised when an aggregate is requested over no data."""

    def __init__(self, message: str = "Input is empty"):
        super().__init__(message, "EMPTY_INPUT")
