from pydantic_settings import BaseSettings
from typing import Optional
import os

PROJECT_ROOT = os.path.dirname(os.path.abspath(__file__))


class Settings(BaseSettings):
    # Run defaults
    config_path: Optional[str] = None  # CODESIGN_CONFIG_PATH, used when --config is omitted
    data_dir: str = os.path.join(PROJECT_ROOT, "data")
    out_dir: str = "out"

    # Execution
    jobs: int = 1
    exhaustive_cap: int = 1_000_000
    log_level: str = "INFO"

    # Network grid provider (only used when both are set)
    grid_api_url: Optional[str] = None
    grid_api_token: Optional[str] = None
    grid_timeout_s: float = 10.0

    class Config:
        env_file = ".env"
        env_prefix = "CODESIGN_"
        case_sensitive = False
        extra = "ignore"  # Ignore extra fields in .env


# Global settings instance
settings = Settings()


def data_path(filename: str) -> str:
    """Path of a shipped data file"""
    return os.path.join(settings.data_dir, filename)
