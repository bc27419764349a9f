"""Abstract UTXO graph of the bribing attack: templates, outputs and spending conditions."""

from enum import Enum
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from .settlement import DepositState


class TxId(str, Enum):
    FUNDING = "Funding"
    COMMITMENT_OLD = "CommitmentOld"
    TX1 = "Tx1"
    TX2 = "Tx2"
    TXB = "TxB"
    TXP1 = "TxP1"
    TXP2 = "TxP2"


class Party(str, Enum):
    CHEATED = "P1"
    CHEATER = "P2"
    BRIBED_MINER = "N_s"
    BLOCK_MINER = "miner"


class OutputRef(BaseModel):
    model_config = ConfigDict(frozen=True)

    tx: TxId
    index: int = Field(..., ge=0)

    def __str__(self) -> str:
        return f"{self.tx.value}:{self.index}"


class KeyOwner(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["key_owner"] = "key_owner"
    party: str


class MultiSig(BaseModel):
    """m-of-n signature gate; `must_include` has to be among the signers."""
    model_config = ConfigDict(frozen=True)
    kind: Literal["multisig"] = "multisig"
    m: int = Field(..., ge=1)
    n: int = Field(..., ge=1)
    signers: Tuple[str, ...]
    must_include: str


class RelativeTimelock(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["relative_timelock"] = "relative_timelock"
    blocks: int = Field(..., ge=0)
    then: "Condition"


class AnyOf(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["any_of"] = "any_of"
    options: Tuple["Condition", ...]


class RequiresConfirmedOutput(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["requires_confirmed"] = "requires_confirmed"
    ref: OutputRef


Condition = Annotated[
    Union[KeyOwner, MultiSig, RelativeTimelock, AnyOf, RequiresConfirmedOutput],
    Field(discriminator="kind"),
]

RelativeTimelock.model_rebuild()
AnyOf.model_rebuild()


class TxInput(BaseModel):
    """Spend of a graph output; `branch` selects the AnyOf option used."""
    ref: OutputRef
    branch: Optional[int] = None


class ExternalInput(BaseModel):
    """Funds entering the graph from a party's wallet."""
    party: str
    amount_sat: int = Field(..., ge=0)


class TxOutput(BaseModel):
    amount_sat: int = Field(..., ge=0)
    condition: Condition
    label: str = ""


class TxTemplate(BaseModel):
    id: TxId
    inputs: List[TxInput] = Field(default_factory=list)
    external_inputs: List[ExternalInput] = Field(default_factory=list)
    outputs: List[TxOutput] = Field(default_factory=list)


class GraphParams(BaseModel):
    channel_amount: int = Field(..., gt=0)
    bribe_fee: int = Field(..., gt=0)
    deposit: int = Field(..., gt=0)
    T: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    n: int = Field(..., ge=1)
    tx_fee: int = Field(1_000, ge=0)


class TxGraph(BaseModel):
    params: GraphParams
    templates: List[TxTemplate]

    def get(self, tx_id: TxId) -> Optional[TxTemplate]:
        for template in self.templates:
            if template.id is tx_id:
                return template
        return None

    def output(self, ref: OutputRef) -> Optional[TxOutput]:
        template = self.get(ref.tx)
        if template is None or ref.index >= len(template.outputs):
            return None
        return template.outputs[ref.index]


class GraphCheck(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class GraphReport(BaseModel):
    checks: List[GraphCheck]
    violations: List[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


class ConfirmationStep(BaseModel):
    tx: TxId
    height: int = Field(..., ge=0)


class LedgerScenario(BaseModel):
    steps: List[ConfirmationStep]
    signers: Optional[List[str]] = Field(None, description="Parties granting signatures; all parties if omitted")
    cosigner_collusion: bool = Field(False, description="N_s and m-1 co-signers sweep the deposit")


class ConfirmationResult(BaseModel):
    confirmed: Dict[str, int] = Field(default_factory=dict, description="Transaction id to height")
    ownership: Dict[str, str] = Field(default_factory=dict, description="Unspent output to controlling party")
    balances: Dict[str, int] = Field(default_factory=dict)
    dead: List[TxId] = Field(default_factory=list)
    deposit_state: DepositState = DepositState.NOT_POSTED
    collusion_sweep: bool = False
    total_input_sat: int = 0
    total_output_sat: int = 0
    total_fee_sat: int = 0
