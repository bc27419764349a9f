from pydantic_settings import BaseSettings
from functools import lru_cache
from pathlib import Path
import os
from dotenv import load_dotenv

load_dotenv()

_DATA_DIR = Path(__file__).resolve().parent.parent / "data"


class Settings(BaseSettings):
    # Application Settings
    APP_NAME: str = "Forkgame Analysis Toolkit"
    DEBUG: bool = os.getenv("DEBUG", "false").lower() == "true"
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # Execution
    FORKGAME_THREADS: int = int(os.getenv("FORKGAME_THREADS", "1"))
    ORACLE_NODE_LIMIT: int = int(os.getenv("ORACLE_NODE_LIMIT", "10000000"))
    DEFAULT_SEED: int = int(os.getenv("DEFAULT_SEED", "7"))
    DEFAULT_TRIALS: int = int(os.getenv("DEFAULT_TRIALS", "10000"))
    DECISION_CACHE_SIZE: int = int(os.getenv("DECISION_CACHE_SIZE", "16384"))

    # Data
    DATA_DIR: str = os.getenv("DATA_DIR", str(_DATA_DIR))

    # Cost defaults
    BTC_PRICE_USD: str = os.getenv("BTC_PRICE_USD", "25000")
    DEFAULT_LAMBDA_S: float = float(os.getenv("DEFAULT_LAMBDA_S", "0.2"))

    class Config:
        case_sensitive = True


@lru_cache()
def get_settings() -> Settings:
    return Settings()
