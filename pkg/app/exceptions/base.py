"""Base exception classes for the forkgame toolkit."""

from typing import Dict, Optional


class ForkGameException(Exception):
    """
    Base exception for all forkgame errors.

    Every subclass fixes an UPPER_SNAKE error code; the CLI logs the message
    and the HTTP routers return both.
    """

    def __init__(self, message: str, error_code: Optional[str] = None):
        self.message = message
        self.error_code = error_code or "FORKGAME_ERROR"
        super().__init__(self.message)

    def to_detail(self) -> Dict[str, str]:
        return {"error_code": self.error_code, "message": self.message}
