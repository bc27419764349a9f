from .base import FileRepository
from .params_repository import ParamsRepository

__all__ = ["FileRepository", "ParamsRepository"]
