import logging

from fastapi import APIRouter, Depends

from app.api.v1.errors import to_http_exception
from app.core.dependencies import get_tx_graph_service
from app.schemas.txgraph import GraphReport, TxGraph
from app.services.tx_graph_service import TxGraphService

logger = logging.getLogger(__name__)
router = APIRouter()


@router.get("/canonical", response_model=TxGraph)
async def canonical_graph(
    channel_amount: int = 100_000_000,
    bribe_fee: int = 300_000,
    deposit: int = 128_000_001,
    T: int = 110,
    m: int = 3,
    n: int = 5,
    tx_graph_service: TxGraphService = Depends(get_tx_graph_service),
) -> TxGraph:
    """The attack's transaction graph for the given amounts."""
    try:
        return tx_graph_service.build_attack_graph(channel_amount, bribe_fee, deposit, T, m, n)
    except Exception as e:
        raise to_http_exception(e, "canonical graph")


@router.post("/validate", response_model=GraphReport)
async def validate_graph(
    graph: TxGraph,
    tx_graph_service: TxGraphService = Depends(get_tx_graph_service),
) -> GraphReport:
    """Static checks of a submitted graph."""
    try:
        return tx_graph_service.validate_graph(graph)
    except Exception as e:
        raise to_http_exception(e, "graph validation")
