"""
raywave - Settings Management
Process-level settings; per-run physics lives in the YAML RunConfig.
"""

from functools import lru_cache
from typing import List, Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class ApiSettings(BaseSettings):
    """HTTP service configuration for `raywave serve`."""

    model_config = SettingsConfigDict(env_prefix="RAYWAVE_API__")

    host: str = Field(default="127.0.0.1")
    port: int = Field(default=8000, ge=1, le=65535)
    cors_origins: List[str] = Field(default=["http://localhost"])
    # Upper bound on grid cells a single /transient request may ask for
    max_cells: int = Field(default=4096, ge=1)


class Settings(BaseSettings):
    """Main application settings."""

    model_config = SettingsConfigDict(
        env_prefix="RAYWAVE_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    app_name: str = Field(default="raywave")
    version: str = Field(default="1.0.0")
    log_level: str = Field(default="INFO")
    # Auto-reload for `raywave serve`; runs never read it
    debug: bool = Field(default=False)

    # The only environment override honoured by CLI runs
    output_dir: Optional[str] = Field(
        default=None,
        description="Output directory; --out on the command line wins over it"
    )

    api: ApiSettings = Field(default_factory=ApiSettings)

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Normalise the level name to upper case."""
        v = v.upper()
        if v not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {v!r}")
        return v


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
