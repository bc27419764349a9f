from .params import GameParams, Violation, Severity
from .settlement import SettlementReport, DepositState
from .simulation import RoundRecord, GameTrace, UtilityEstimate
from .oracle import ConditionCheck, ConditionReport, DominatingActionReport, BestResponseReport, ActionValue
from .cost import BoundKind, CostQuote, CostRequest
from .empirics import FeeRecord, PoolShareRow, PoolShareTable, EmpiricsReport
from .txgraph import (
    TxId, Party, OutputRef, KeyOwner, MultiSig, RelativeTimelock, AnyOf, RequiresConfirmedOutput,
    TxInput, ExternalInput, TxOutput, TxTemplate, GraphParams, TxGraph, GraphCheck, GraphReport,
    ConfirmationStep, LedgerScenario, ConfirmationResult,
)
from .run_config import RunConfig, OutputFormat
from .requests import SimulationRequest

__all__ = [
    "GameParams",
    "Violation",
    "Severity",
    "SettlementReport",
    "DepositState",
    "RoundRecord",
    "GameTrace",
    "UtilityEstimate",
    "ConditionCheck",
    "ConditionReport",
    "DominatingActionReport",
    "BestResponseReport",
    "ActionValue",
    "BoundKind",
    "CostQuote",
    "CostRequest",
    "FeeRecord",
    "PoolShareRow",
    "PoolShareTable",
    "EmpiricsReport",
    "TxId",
    "Party",
    "OutputRef",
    "KeyOwner",
    "MultiSig",
    "RelativeTimelock",
    "AnyOf",
    "RequiresConfirmedOutput",
    "TxInput",
    "ExternalInput",
    "TxOutput",
    "TxTemplate",
    "GraphParams",
    "TxGraph",
    "GraphCheck",
    "GraphReport",
    "ConfirmationStep",
    "LedgerScenario",
    "ConfirmationResult",
    "RunConfig",
    "OutputFormat",
    "SimulationRequest",
]
