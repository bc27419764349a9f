from enum import Enum
from typing import List

from pydantic import BaseModel, Field


class DepositState(str, Enum):
    NOT_POSTED = "NotPosted"
    LOCKED_LOST = "LockedLost"
    RECLAIMED = "Reclaimed"
    SWEPT = "Swept"  # taken by a co-signer coalition without txs_p2


class SettlementReport(BaseModel):
    """Final rewards over the winning chain plus the depositor side-ledger."""
    per_player_reward: List[int] = Field(..., description="Net reward per player (sat)")
    winning_chain_id: int
    deposit_state: DepositState
    block_reward_total: int = Field(..., description="Sum of block rewards on the winning chain (sat)")
    deposit_adjustment: int = Field(0, le=0, description="0 or -P, charged to the depositor")
    fee_debits: int = Field(0, ge=0, description="Special-set fees charged to the depositor (sat)")
    winning_chain: List[str] = Field(default_factory=list, description="Block kinds with winners")
