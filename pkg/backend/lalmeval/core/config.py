"""Application configuration using pydantic-settings.

These are process-level knobs (logging, HTTP pool sizing, mock server host).
Per-run evaluation settings live in the YAML run configuration instead, see
``lalmeval.config``.
"""

from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables.

    Attributes:
        app_name: Application name.
        debug: Enable debug mode.
        log_level: Logging level.
        mock_host: Interface the mock endpoint server binds to.
        http_max_connections: Upper bound on pooled HTTP connections per run.
        http_connect_timeout_s: Connect timeout applied to every request.
        judge_template_version: Version tag of the shipped judge prompt templates.
    """

    model_config = SettingsConfigDict(
        env_prefix="LALMEVAL_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    app_name: str = "lalmeval"
    debug: bool = False
    log_level: str = "INFO"
    mock_host: str = "127.0.0.1"
    http_max_connections: int = 256
    http_connect_timeout_s: float = 10.0
    judge_template_version: str = "v1"


@lru_cache
def get_settings() -> Settings:
    """Get cached application settings.

    Returns:
        Application settings instance.
    """
    return Settings()
