import math
from enum import Enum
from typing import Any, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

# Lambda vectors this close to one are treated as rounding noise and normalized.
LAMBDA_NORMALIZE_TOLERANCE = 1e-9
LAMBDA_SUM_TOLERANCE = 1e-12


class GameParams(BaseModel):
    """Every scalar symbol of the mining game. Money is integer satoshi."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    n: int = Field(..., ge=1, description="Number of players")
    lambdas: Tuple[float, ...] = Field(..., alias="lambda", description="Mining-power fractions")
    R: int = Field(..., ge=1, description="Total rounds")
    T: int = Field(..., ge=0, description="Timelock in rounds")
    B: int = Field(..., ge=0, description="Base block reward (sat)")
    m: int = Field(..., ge=0, description="Average transactions per block")
    f_bar: int = Field(..., ge=0, description="Average single-transaction fee (sat)")
    f1: int = Field(..., ge=0, description="Fee total of a txs1 block (sat)")
    f2: int = Field(..., ge=0, description="Fee total of a txs2 block (sat)")
    c_p1: int = Field(1, ge=0, description="Slots taken by tx_p1")
    c_p2: int = Field(1, ge=0, description="Slots taken by tx_p2")
    f_bar_p1: int = Field(..., ge=0, description="Per-slot fee of tx_p1 (sat)")
    f_bar_p2: int = Field(..., ge=0, description="Per-slot fee of tx_p2 (sat)")
    penalty_P: int = Field(0, ge=0, description="Self-penalty deposit (sat)")
    p1_creator: Optional[int] = Field(None, ge=0, description="Player posting the deposit")
    strict_distribution: bool = False
    charge_special_fees: bool = False

    @model_validator(mode="before")
    @classmethod
    def _fill_defaults(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        key = "lambda" if "lambda" in data else "lambdas"
        if key in data and data[key] is not None:
            powers = tuple(float(x) for x in data[key])
            total = math.fsum(powers)
            if powers and abs(total - 1.0) <= LAMBDA_NORMALIZE_TOLERANCE and total > 0:
                powers = tuple(x / total for x in powers)
            data[key] = powers
            data.setdefault("n", len(powers))
        if data.get("f_bar_p1") is None and "f1" in data:
            f = int(data.get("m", 0)) * int(data.get("f_bar", 0))
            data["f_bar_p1"] = max(int(data["f1"]) - f, 0)
        if data.get("f_bar_p2") is None and "f_bar" in data:
            data["f_bar_p2"] = int(data["f_bar"])
        return data

    @model_validator(mode="after")
    def _check_structure(self) -> "GameParams":
        if len(self.lambdas) != self.n:
            raise ValueError(f"lambda has {len(self.lambdas)} entries for n={self.n}")
        if any(not (x > 0) for x in self.lambdas):
            raise ValueError("all mining powers must be positive")
        if self.T >= self.R:
            raise ValueError(f"timelock T={self.T} must be smaller than R={self.R}")
        if self.p1_creator is not None and self.p1_creator >= self.n:
            raise ValueError(f"p1_creator {self.p1_creator} is not a player")
        return self

    @property
    def f(self) -> int:
        return self.m * self.f_bar

    @property
    def f_p1(self) -> int:
        return (self.m - self.c_p1) * self.f_bar + self.c_p1 * self.f_bar_p1

    @property
    def f_p2(self) -> int:
        return (self.m - self.c_p2) * self.f_bar + self.c_p2 * self.f_bar_p2

    @property
    def strongest(self) -> int:
        """Index of the strongest player (lowest index on ties)."""
        return max(range(self.n), key=lambda i: (self.lambdas[i], -i))

    @property
    def lambda_s(self) -> float:
        return self.lambdas[self.strongest]

    @property
    def lambda_min(self) -> float:
        return min(self.lambdas)

    def updated(self, **changes: Any) -> "GameParams":
        """Validated copy with some fields replaced."""
        data = self.model_dump()
        data.update(changes)
        return GameParams.model_validate(data)


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


class Violation(BaseModel):
    code: str
    message: str
    severity: Severity = Severity.ERROR


def errors_only(violations: List[Violation]) -> List[Violation]:
    return [v for v in violations if v.severity is Severity.ERROR]
