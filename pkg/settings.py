# settings.py
"""
Configuration for synccheck
- Caps for the exponential parts of the checker (subset sequences, powerset search)
- Size limits for the brute-force oracles
- Read from SYNCCHECK_* environment variables or a local .env file
"""

import logging
from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict
from rich.console import Console
from rich.logging import RichHandler


class SyncCheckSettings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="SYNCCHECK_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    subset_cap: int = Field(default=2**20, ge=1)
    powerset_node_cap: int = Field(default=2**16, ge=1)
    oracle_max_states: int = Field(default=12, ge=1)
    brute_sat_max_vars: int = Field(default=24, ge=0)
    distinguish_class_cap: int = Field(default=4096, ge=1)
    fuzz_workers: int = Field(default=1, ge=1)
    log_level: str = "WARNING"


@lru_cache(maxsize=1)
def get_settings() -> SyncCheckSettings:
    return SyncCheckSettings()


def configure_logging(level: str | int | None = None) -> None:
    """Route log records through rich; safe to call more than once."""
    if level is None:
        level = get_settings().log_level
    root = logging.getLogger()
    if not any(isinstance(h, RichHandler) for h in root.handlers):
        root.addHandler(
            RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=True)
        )
    root.setLevel(level)
