from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from app.api import api_router
from app.core.config import get_settings
import logging

settings = get_settings()

# Set up logging
logging.basicConfig(level=settings.LOG_LEVEL)
logger = logging.getLogger(__name__)

app = FastAPI(
    title=settings.APP_NAME,
    description="Simulation, equilibrium checks and cost bounds for Bribe & Fork attacks on payment channels",
    version="1.0.0"
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"] if settings.DEBUG else [],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(api_router, prefix="/api")


@app.on_event("startup")
async def startup_event():
    logger.info(f"Starting {settings.APP_NAME} (debug={settings.DEBUG}, threads={settings.FORKGAME_THREADS})")


@app.get("/")
async def root():
    return {"message": f"Welcome to the {settings.APP_NAME} API"}


@app.get("/health")
async def health_check():
    return {"status": "healthy"}
