"""
Process-level settings read from the environment (and an optional .env file)
"""
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class LabSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="GDD_", env_file=".env", extra="ignore")

    threads: int = Field(default=1, ge=1, description="Upper bound on concurrently running sweep arms")
    log_level: str = Field(default="INFO")

    @field_validator("log_level")
    def check_log_level(cls, v):
        if v.upper() not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Unsupported log level '{v}'")
        return v.upper()


def get_settings() -> LabSettings:
    """Fresh read each call so that environment changes are picked up."""
    return LabSettings()
