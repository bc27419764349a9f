import json
from typing import List, Optional

from pydantic import BaseModel, Field

from .settlement import SettlementReport


class RoundRecord(BaseModel):
    """What happened in one round of a traced game."""
    round: int = Field(..., ge=1)
    state_hash: str
    actions: List[str] = Field(..., description="Action chosen by each player")
    winner: int = Field(..., ge=0)
    applied: str


class GameTrace(BaseModel):
    seed: int
    trial: int = 0
    strategies: List[str]
    records: List[RoundRecord]
    settlement: SettlementReport

    def to_jsonl(self) -> str:
        """One JSON record per round, then the settlement record."""
        lines = [
            json.dumps({"type": "round", "seed": self.seed, "trial": self.trial, **record.model_dump()})
            for record in self.records
        ]
        lines.append(json.dumps({"type": "settlement", **self.settlement.model_dump(mode="json")}))
        return "\n".join(lines)


class UtilityEstimate(BaseModel):
    mean: List[float] = Field(..., description="Mean utility per player (sat)")
    stderr: List[float] = Field(..., description="Standard error of the mean per player (sat)")
    trials: int = Field(..., ge=1)
    stderr_defined: bool = Field(True, description="False when trials == 1 and stderr is reported as zero")
    seed: Optional[int] = None
    workers: int = 1
