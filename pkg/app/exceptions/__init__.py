from .base import ForkGameException
from .game import EmptyChainError, IllegalActionError, GameNotOverError, UnknownStrategyError
from .params import InvalidParamsError, DomainError
from .oracle import InstanceTooLargeError
from .ingest import ParseError, SchemaError, EmptyInputError
from .txgraph import ConflictViolationError, ConditionViolationError

__all__ = [
    "ForkGameException",
    "EmptyChainError",
    "IllegalActionError",
    "GameNotOverError",
    "UnknownStrategyError",
    "InvalidParamsError",
    "DomainError",
    "InstanceTooLargeError",
    "ParseError",
    "SchemaError",
    "EmptyInputError",
    "ConflictViolationError",
    "ConditionViolationError",
]
