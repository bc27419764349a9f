from typing import List, Optional

from pydantic import BaseModel, Field

from .params import GameParams


class SimulationRequest(BaseModel):
    """Monte Carlo run over the HTTP API."""
    params: GameParams
    profile: str = Field("bribe-and-fork", description="Preset used when strategies is omitted")
    strategies: Optional[List[str]] = None
    trials: int = Field(1_000, ge=1, le=1_000_000)
    seed: int = 7
    credible_threats: bool = False
