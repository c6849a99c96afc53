"""Application settings module."""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="DUALITY_LAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    app_name: str = "Duality Lab"
    app_version: str = "0.1.0"
    debug: bool = False
    log_level: str = "INFO"

    # Outputs
    output_dir: str = Field(default="out", description="Directory for field dumps and reports")

    # Numerical defaults
    node_threshold: float = Field(default=1e-12, gt=0.0, lt=1.0, description="Node mask threshold, fraction of max R^2")
    decay_tolerance: float = Field(default=1e-10, gt=0.0, description="Allowed |psi| at Vanishing boundaries, relative")
    stability_bound: float = Field(default=0.5, gt=0.0, description="Upper bound for dt * max|V|")

    # Verification suites
    verify_grid_points: int = Field(default=256, ge=8, description="Grid size used by verify suites")
    verify_dt: float = Field(default=1e-3, gt=0.0, description="Time step used by verify suites")
    fd_samples: int = Field(default=20, ge=1, description="Random sites per state and functional in the FD oracle")
    default_seed: int = Field(default=0, description="Seed used when neither config nor flag provides one")


def get_settings() -> Settings:
    """Get settings instance."""
    return Settings()


# Global settings instance
settings = get_settings()
