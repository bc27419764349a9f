from decimal import Decimal
from typing import Dict, List

from pydantic import BaseModel, Field


class FeeRecord(BaseModel):
    period: str = Field(..., description="ISO week label")
    avg_block_fee_sat: int = Field(..., ge=0)
    avg_tx_fee_sat: int = Field(..., ge=0)
    avg_tx_per_block: Decimal = Field(..., ge=0)

    @property
    def is_consistent(self) -> bool:
        """Block fee within 10% of tx fee times tx count."""
        expected = Decimal(self.avg_tx_fee_sat) * self.avg_tx_per_block
        if expected == 0:
            return self.avg_block_fee_sat == 0
        return abs(Decimal(self.avg_block_fee_sat) - expected) <= expected / 10


class PoolShareRow(BaseModel):
    pool: str
    blocks: int = Field(..., ge=0)
    share: float = Field(..., ge=0, le=1)


class PoolShareTable(BaseModel):
    rows: List[PoolShareRow]
    total_blocks: int

    def share_of(self, pool: str) -> float:
        for row in self.rows:
            if row.pool == pool:
                return row.share
        raise KeyError(pool)


class EmpiricsReport(BaseModel):
    weeks: int
    mean_block_fee_sat: int
    min_block_fee_sat: int
    max_block_fee_sat: int
    mean_tx_fee_sat: int
    min_tx_fee_sat: int
    max_tx_fee_sat: int
    mean_tx_per_block: int
    inconsistent_weeks: List[str] = Field(default_factory=list)
    shares: PoolShareTable
    lambda_s: float
    strongest_pool: str
    relatively_strong_pools: List[str] = Field(default_factory=list)
    lambda_min_estimates: Dict[str, float] = Field(default_factory=dict)
    strict_violations: List[str] = Field(default_factory=list)
