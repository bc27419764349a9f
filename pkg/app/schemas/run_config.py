from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field


class OutputFormat(str, Enum):
    HUMAN = "human"
    JSON_LINES = "json-lines"


class RunConfig(BaseModel):
    """Everything a simulate or oracle run needs."""
    params_path: str
    strategies: List[str] = Field(..., min_length=1, description="Strategy name per player")
    trials: int = Field(..., ge=1)
    seed: int = 7
    output_format: OutputFormat = OutputFormat.HUMAN
    threads: int = Field(1, ge=1)
    credible_threats: bool = False
    strategy_space: str = Field("library", pattern="^(library|full)$")
    trace: Optional[str] = Field(None, description="Write one traced game as JSON lines here")
