"""Game-rule exception classes."""

from typing import Optional

from .base import ForkGameException


class EmptyChainError(ForkGameException):
    """Raised when an operation needs a chain with at least one block."""

    def __init__(self, message: str = "Chain has no blocks"):
        super().__init__(message, "EMPTY_CHAIN")


class IllegalActionError(ForkGameException):
    """Raised when an action is outside Ω(state, round)."""

    def __init__(
        self,
        message: str = "Illegal action",
        player: Optional[int] = None,
        round_index: Optional[int] = None,
    ):
        self.player = player
        self.round_index = round_index
        if player is not None and round_index is not None:
            message = f"{message} (player {player}, round {round_index})"
        super().__init__(message, "ILLEGAL_ACTION")


class GameNotOverError(ForkGameException):
    """Raised when settling a game that still has rounds to play."""

    def __init__(self, message: str = "Game is not over"):
        super().__init__(message, "GAME_NOT_OVER")


class UnknownStrategyError(ForkGameException):
    """Raised for strategy names outside the built-in library."""

    def __init__(self, message: str = "Unknown strategy"):
        super().__init__(message, "UNKNOWN_STRATEGY")
