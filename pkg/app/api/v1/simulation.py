import logging

from fastapi import APIRouter, Depends
from fastapi.concurrency import run_in_threadpool

from app.api.v1.errors import to_http_exception
from app.core.dependencies import get_simulation_service, get_strategy_service
from app.schemas.requests import SimulationRequest
from app.schemas.simulation import UtilityEstimate
from app.services.simulation_service import SimulationService
from app.services.strategy_service import StrategyService

logger = logging.getLogger(__name__)
router = APIRouter()


@router.post("/estimate", response_model=UtilityEstimate)
async def estimate_utilities(
    request: SimulationRequest,
    simulation_service: SimulationService = Depends(get_simulation_service),
    strategy_service: StrategyService = Depends(get_strategy_service),
) -> UtilityEstimate:
    """Monte Carlo estimate of every player's expected utility."""
    try:
        params = request.params
        names = request.strategies or strategy_service.preset(request.profile, params)
        profile = strategy_service.profile(names, params)
        if request.credible_threats:
            profile = strategy_service.with_credible_threats(profile)
        logger.info(f"Simulating {request.trials} trials of {names}")
        return await run_in_threadpool(
            simulation_service.estimate_utilities, profile, params, request.trials, request.seed
        )
    except Exception as e:
        raise to_http_exception(e, "utility estimate")
