"""Dependency injection container for services."""

from functools import lru_cache

from app.repositories.params_repository import ParamsRepository
from app.services.attack_cost_service import AttackCostService
from app.services.economics_service import EconomicsService
from app.services.empirics_service import EmpiricsService
from app.services.equilibrium_service import EquilibriumService
from app.services.game_rules_service import GameRulesService
from app.services.report_formatting_service import ReportFormattingService
from app.services.simulation_service import SimulationService
from app.services.strategy_service import StrategyService
from app.services.tx_graph_service import TxGraphService


# Services are stateless apart from configuration, so one instance each is shared

@lru_cache()
def get_economics_service() -> EconomicsService:
    """Get economics service (cached singleton)."""
    return EconomicsService()


@lru_cache()
def get_game_rules_service() -> GameRulesService:
    """Get game rules service (cached singleton)."""
    return GameRulesService(get_economics_service())


@lru_cache()
def get_strategy_service() -> StrategyService:
    """Get strategy service (cached singleton)."""
    return StrategyService(get_game_rules_service())


@lru_cache()
def get_simulation_service() -> SimulationService:
    """Get simulation service (cached singleton)."""
    return SimulationService(get_game_rules_service())


@lru_cache()
def get_attack_cost_service() -> AttackCostService:
    """Get attack cost service (cached singleton)."""
    return AttackCostService()


@lru_cache()
def get_equilibrium_service() -> EquilibriumService:
    """Get equilibrium service (cached singleton)."""
    return EquilibriumService(get_game_rules_service(), get_strategy_service(), get_attack_cost_service())


@lru_cache()
def get_empirics_service() -> EmpiricsService:
    """Get empirics service (cached singleton)."""
    return EmpiricsService(get_economics_service())


@lru_cache()
def get_tx_graph_service() -> TxGraphService:
    """Get transaction graph service (cached singleton)."""
    return TxGraphService()


@lru_cache()
def get_report_formatting_service() -> ReportFormattingService:
    """Get report formatting service (cached singleton)."""
    return ReportFormattingService()


def get_params_repository() -> ParamsRepository:
    """Get params repository."""
    return ParamsRepository()
