from fastapi import APIRouter
from .cost import router as cost_router
from .analysis import router as analysis_router
from .simulation import router as simulation_router
from .txgraph import router as txgraph_router

api_router = APIRouter()
api_router.include_router(cost_router, prefix="/cost", tags=["cost"])
api_router.include_router(analysis_router, prefix="/analysis", tags=["analysis"])
api_router.include_router(simulation_router, prefix="/simulation", tags=["simulation"])
api_router.include_router(txgraph_router, prefix="/txgraph", tags=["txgraph"])
