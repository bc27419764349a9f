from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class ConditionCheck(BaseModel):
    """One hypothesis: the computed quantity, its threshold and the verdict."""
    name: str
    value: Optional[float] = None
    threshold: Optional[float] = None
    passed: Optional[bool] = None
    detail: str = ""


class ConditionReport(BaseModel):
    checks: Dict[str, ConditionCheck]
    y: float = Field(..., description="Power of players for whom the bribe is insufficient")
    equilibrium_conditions_hold: bool
    strict_violations: List[str] = Field(default_factory=list)

    def passed(self, name: str) -> Optional[bool]:
        return self.checks[name].passed

    def value(self, name: str) -> Optional[float]:
        return self.checks[name].value


class ActionValue(BaseModel):
    action: str
    utility: float


class DominatingActionReport(BaseModel):
    action: str
    decision: str
    txset: str
    target_chain_id: int
    margin: float = Field(..., description="Gap to the second best action (inf if unique)")
    ties: List[str] = Field(default_factory=list)
    values: List[ActionValue] = Field(default_factory=list)


class BestResponseReport(BaseModel):
    player: int
    strategy: str
    is_best_response: bool
    utility: float
    witness_strategy: Optional[str] = None
    witness_utility: Optional[float] = None
    utility_gap: float = 0.0
    strategy_space: str = "library"
