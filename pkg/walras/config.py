"""
Config Module - Настройки и логирование walras

Настройки читаются из окружения (префикс WALRAS_) и файла .env:
- WalrasSettings: все настраиваемые параметры
- get_settings: кэшированный экземпляр настроек
- setup_logging: единая настройка логирования (файл + консоль)
"""

import logging
from functools import lru_cache
from typing import Optional

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


# -------------------- Settings --------------------
class WalrasSettings(BaseSettings):
    """Runtime knobs for the oracles, sweeps and the CLI."""

    model_config = SettingsConfigDict(
        env_prefix="WALRAS_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    log_level: str = "INFO"
    log_file: str = "walras.log"

    # Полная проверка GS стоит B^m * 2^m вызовов demand
    gs_check_cap: int = Field(default=5, ge=1, le=16)
    demand_cache_size: int = Field(default=65536, ge=0)

    submodularity_sample: int = Field(default=100_000, ge=1)
    sample_seed: int = 0

    max_rounds: int = Field(default=100_000, ge=1)
    debug: bool = False


@lru_cache(maxsize=1)
def get_settings() -> WalrasSettings:
    load_dotenv()
    return WalrasSettings()


# -------------------- Logging Setup --------------------
def setup_logging(settings: Optional[WalrasSettings] = None, verbose: bool = False) -> None:
    """Configure root logging the same way for every entry point."""
    settings = settings or get_settings()
    level = logging.DEBUG if verbose else getattr(logging, settings.log_level.upper(), logging.INFO)

    handlers: list = [logging.StreamHandler()]
    if settings.log_file:
        handlers.insert(0, logging.FileHandler(settings.log_file, encoding="utf-8"))

    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)
