"""Oracle exception classes."""

from .base import ForkGameException


class InstanceTooLargeError(ForkGameException):
    """Raised when a game tree exceeds the configured node budget."""

    def __init__(self, required: int, limit: int):
        self.required = required
        self.limit = limit
        super().__init__(
            f"Game tree needs {required} nodes, budget is {limit}",
            "INSTANCE_TOO_LARGE",
        )
