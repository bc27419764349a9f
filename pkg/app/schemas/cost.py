from decimal import Decimal
from enum import Enum
from typing import Dict, Optional

from pydantic import BaseModel, Field


class BoundKind(str, Enum):
    LEGACY = "Legacy"
    BF_GENERAL = "BF_General"
    BF_SIMPLIFIED = "BF_Simplified"
    FEASIBILITY_CEILING = "FeasibilityCeiling"
    PENALTY_FLOOR = "PenaltyFloor"


class CostQuote(BaseModel):
    bound_kind: BoundKind
    value_sat: int = Field(..., description="Rounded bound in satoshi")
    raw_value: float = Field(..., description="Real-valued bound before rounding")
    inputs: Dict[str, str] = Field(default_factory=dict)
    fiat_value: Optional[Decimal] = None
    note: Optional[str] = None


class CostRequest(BaseModel):
    """Inputs of the cost calculators, in satoshi and fractions."""
    f_bar: int = Field(10_000, gt=0)
    f1_minus_f: int = Field(10_000, ge=0)
    f: int = Field(15_000_000, ge=0)
    B: int = Field(625_000_000, ge=0)
    lambda_min: float = Field(1e-4, gt=0, le=1)
    lambda_s: Optional[float] = Field(None, gt=0, le=1)
    lambda_j: float = Field(0.02, gt=0, le=1)
    T: int = Field(110, ge=0)
    price: Decimal = Field(Decimal("25000"), gt=0)
