from typing import Callable, Iterable, Tuple

import pytest
from fastapi.testclient import TestClient

from app.models import Block, Chain, GlobalState, TxSetKind
from app.repositories import ParamsRepository
from app.schemas.params import GameParams
from app.services.attack_cost_service import AttackCostService
from app.services.economics_service import EconomicsService
from app.services.empirics_service import EmpiricsService
from app.services.equilibrium_service import EquilibriumService
from app.services.game_rules_service import GameRulesService
from app.services.simulation_service import SimulationService
from app.services.strategy_service import StrategyService
from app.services.tx_graph_service import TxGraphService

B = 625_000_000
M = 1500
F_BAR = 10_000
F = M * F_BAR


@pytest.fixture
def economics() -> EconomicsService:
    return EconomicsService()


@pytest.fixture
def rules(economics) -> GameRulesService:
    return GameRulesService(economics)


@pytest.fixture
def strategies(rules) -> StrategyService:
    return StrategyService(rules)


@pytest.fixture
def simulation(rules) -> SimulationService:
    return SimulationService(rules)


@pytest.fixture
def cost() -> AttackCostService:
    return AttackCostService()


@pytest.fixture
def oracle(rules, strategies, cost) -> EquilibriumService:
    return EquilibriumService(rules, strategies, cost)


@pytest.fixture
def empirics(economics) -> EmpiricsService:
    return EmpiricsService(economics)


@pytest.fixture
def txgraph() -> TxGraphService:
    return TxGraphService()


@pytest.fixture
def make_params() -> Callable[..., GameParams]:
    """Three miners (0.5, 0.3, 0.2), R=5, T=2 and the 2022 fee scale; keywords override."""

    def build(**overrides) -> GameParams:
        data = {
            "lambda": (0.5, 0.3, 0.2),
            "R": 5,
            "T": 2,
            "B": B,
            "m": M,
            "f_bar": F_BAR,
            "f1": F + 10_000,
            "f2": F + 15_000,
        }
        data.update(overrides)
        return GameParams.model_validate(data)

    return build


@pytest.fixture
def bundled_params() -> GameParams:
    """The bundled three-miner instance: λ=(0.5, 0.485, 0.015), R=6, T=3, f2-f=300 000."""
    return ParamsRepository().load("three_miners_2022.params")


@pytest.fixture
def make_state() -> Callable[..., GlobalState]:
    """Single-chain state from (kind, winner) pairs at a given round."""

    def build(blocks: Iterable[Tuple[TxSetKind, int]], round_index: int) -> GlobalState:
        chain = Chain(blocks=tuple(Block(kind, winner) for kind, winner in blocks), created_round=0, chain_id=0)
        return GlobalState(chains=(chain,), round=round_index, next_chain_id=1)

    return build


@pytest.fixture
def client() -> TestClient:
    from app.main import app

    return TestClient(app)
