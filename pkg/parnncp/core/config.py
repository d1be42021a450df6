"""
Core configuration using Pydantic Settings.

All environment variables are loaded here and validated. Library entry
points take explicit arguments; these settings only provide the defaults
used by configs, the CLI and the cost model.
"""

from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # App Configuration
    APP_NAME: str = "parnncp"
    ENVIRONMENT: str = "development"
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # Sentry Monitoring
    SENTRY_DSN: Optional[str] = None

    # Decomposition defaults
    DEFAULT_RANK: int = 8
    DEFAULT_MAX_OUTER_ITERS: int = 100
    DEFAULT_TOLERANCE: float = 1e-6
    DEFAULT_SEED: int = 0
    DEFAULT_NLS_METHOD: str = "bpp"  # bpp | hals
    DEFAULT_WORKER_MODE: str = "sim"  # sim | threads

    # Alpha-beta cost model
    COST_ALPHA: float = 1e-6  # seconds per message
    COST_BETA: float = 1e-9  # seconds per float64 word

    # Solver tolerances
    ZERO_COLUMN_GUARD: float = 1e-16
    KKT_ZERO_TOL: float = 1e-12
    BPP_MAX_ITER_FACTOR: int = 10  # max BPP exchanges = factor * R + 20

    # Artifact I/O
    IO_MAX_RETRIES: int = 3
    IO_RETRY_WAIT_SECONDS: float = 0.05

    # Run journal
    RUN_LOG_ENABLED: bool = True
    RUN_LOG_DIR: str = "logs"

    @property
    def is_production(self) -> bool:
        """Check if running in production environment."""
        return self.ENVIRONMENT.lower() == "production"

    def bpp_iteration_limit(self, rank: int) -> int:
        """Upper bound on BPP exchange rounds for a rank-R subproblem."""
        return self.BPP_MAX_ITER_FACTOR * rank + 20


# Global settings instance
settings = Settings()
