"""Runtime configuration."""

import os

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Runtime settings loaded from ``GPAC_*`` environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="GPAC_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Parallelism
    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    use_jit: bool = True

    # Graph construction: memory budget of one block of squared distances
    knn_chunk_bytes: int = Field(default=64 * 1024 * 1024, ge=1024)

    # Trace objective: exact below this size, sampled above it
    trace_exact_limit: int = Field(default=20_000, ge=1)
    trace_sample_size: int = Field(default=5_000, ge=1)

    # Logging
    log_level: str = "INFO"
    log_format: str = "console"


settings = Settings()
