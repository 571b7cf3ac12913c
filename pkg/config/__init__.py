"""
Configuration Package
Settings for the Hölder oscillation toolkit, read from the environment and .env
"""

import os
from functools import lru_cache

from pydantic import model_validator
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Main settings class - combines all configuration"""

    # Application Configuration
    APP_NAME: str = os.getenv("APP_NAME", "Holder Oscillation Toolkit")
    APP_ENV: str = os.getenv("APP_ENV", "local")

    # Logging Configuration
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    LOG_TO_FILE: bool = os.getenv("LOG_TO_FILE", "true").lower() == "true"
    LOG_DIR: str = os.getenv("LOG_DIR", "storage/logs")
    LOG_MAX_SIZE: int = int(os.getenv("LOG_MAX_SIZE", "10485760"))
    LOG_BACKUP_COUNT: int = int(os.getenv("LOG_BACKUP_COUNT", "5"))

    # Execution Configuration
    OSC_THREADS: int = int(os.getenv("OSC_THREADS", "1"))
    OSC_OUTPUT_DIR: str = os.getenv("OSC_OUTPUT_DIR", "storage/app")
    OSC_REPORT_TIMING: bool = os.getenv("OSC_REPORT_TIMING", "false").lower() == "true"
    DEFAULT_SEED: int = int(os.getenv("DEFAULT_SEED", "7"))

    # Quadrature Configuration
    QUAD_ABS_TOL: float = float(os.getenv("QUAD_ABS_TOL", "1e-10"))
    QUAD_REL_TOL: float = float(os.getenv("QUAD_REL_TOL", "1e-10"))
    QUAD_MAX_SUBDIV: int = int(os.getenv("QUAD_MAX_SUBDIV", "30"))
    QUAD_PANEL_ORDER: int = int(os.getenv("QUAD_PANEL_ORDER", "8"))

    # Function space Configuration
    HOLDER_MIN_GAP: float = float(os.getenv("HOLDER_MIN_GAP", str(2.0**-40)))
    HOLDER_PAIRS: int = int(os.getenv("HOLDER_PAIRS", "4096"))

    # Dyadic Configuration
    DENSE_MAX_LEVEL: int = int(os.getenv("DENSE_MAX_LEVEL", "26"))
    KINK_EXCLUSION: float = float(os.getenv("KINK_EXCLUSION", str(2.0**-45)))

    @model_validator(mode="after")
    def validate_numerics(self) -> "Settings":
        """Reject settings the numerical kernels cannot honour."""
        if self.QUAD_ABS_TOL <= 0 or self.QUAD_REL_TOL <= 0:
            raise ValueError("QUAD_ABS_TOL and QUAD_REL_TOL must be positive")
        if self.QUAD_MAX_SUBDIV < 1:
            raise ValueError("QUAD_MAX_SUBDIV must be at least 1")
        if self.QUAD_PANEL_ORDER < 2:
            raise ValueError("QUAD_PANEL_ORDER must be at least 2")
        if self.OSC_THREADS < 1:
            raise ValueError("OSC_THREADS must be at least 1")
        if not 0 <= self.DENSE_MAX_LEVEL <= 30:
            raise ValueError("DENSE_MAX_LEVEL must lie in [0, 30]")
        if self.HOLDER_MIN_GAP <= 0:
            raise ValueError("HOLDER_MIN_GAP must be positive")
        return self

    class Config:
        env_file = ".env"
        case_sensitive = True
        extra = "ignore"


@lru_cache
def get_settings() -> Settings:
    return Settings()


settings = get_settings()
