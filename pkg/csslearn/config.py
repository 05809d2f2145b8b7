"""Ambient settings for the command line tools."""

from pathlib import Path
from pydantic_settings import BaseSettings, SettingsConfigDict

# Base directory
BASE_DIR = Path(__file__).resolve().parent.parent


class Settings(BaseSettings):
    """Process-wide settings.

    Only logging and output locations live here. Scenario parameters are read
    from config files and command line flags, never from the environment.
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="CSSLEARN_",
        case_sensitive=False,
        extra="ignore",
    )

    # Logs
    log_path: str = str(BASE_DIR / "data" / "logs")
    log_level: str = "INFO"

    # Outputs
    output_dir: str = str(BASE_DIR / "data" / "results")

    # Engine progress line every N steps (0 disables)
    progress_interval: int = 1000


settings = Settings()
