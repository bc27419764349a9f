from typing import List
import logging

from fastapi import APIRouter, Depends

from app.api.v1.errors import to_http_exception
from app.core.dependencies import get_attack_cost_service
from app.schemas.cost import CostQuote, CostRequest
from app.services.attack_cost_service import AttackCostService

logger = logging.getLogger(__name__)
router = APIRouter()


@router.post("/quotes", response_model=List[CostQuote])
async def cost_quotes(
    request: CostRequest,
    cost_service: AttackCostService = Depends(get_attack_cost_service),
) -> List[CostQuote]:
    """Legacy, Bribe & Fork, ceiling and penalty quotes."""
    try:
        return cost_service.quotes(request)
    except Exception as e:
        raise to_http_exception(e, "cost quotes")
