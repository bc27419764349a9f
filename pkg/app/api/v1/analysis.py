import logging

from fastapi import APIRouter, Depends

from app.api.v1.errors import to_http_exception
from app.core.dependencies import get_equilibrium_service
from app.schemas.oracle import ConditionReport
from app.schemas.params import GameParams
from app.services.equilibrium_service import EquilibriumService

logger = logging.getLogger(__name__)
router = APIRouter()


@router.post("/conditions", response_model=ConditionReport)
async def theorem_conditions(
    params: GameParams,
    equilibrium_service: EquilibriumService = Depends(get_equilibrium_service),
) -> ConditionReport:
    """Evaluate every hypothesis of the attack's equilibrium results."""
    try:
        return equilibrium_service.theorem_conditions(params)
    except Exception as e:
        raise to_http_exception(e, "equilibrium hypotheses")
