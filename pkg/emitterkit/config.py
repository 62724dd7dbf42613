"""A module providing configuration variables."""

from pydantic_settings import BaseSettings, SettingsConfigDict


class BaseConfig(BaseSettings):
    """A class containing base settings configuration."""
    model_config = SettingsConfigDict(extra="ignore", env_prefix="EMITTERKIT_")


class AppConfig(BaseConfig):
    """A class containing toolkit's configuration."""
    LOG_LEVEL: str = "INFO"

    # photon-sim
    MAX_TAGS: int = 50_000_000

    # correlator
    CORRELATOR_CHUNKS: int = 8

    # fitkit
    MC_SAMPLES: int = 200
    MIN_MC_SAMPLES: int = 100
    BOOTSTRAP_FAILURE_LIMIT: float = 0.2
    MAX_ITERATIONS: int = 200
    STEP_TOLERANCE: float = 1e-10
    N_JOBS: int = 1
    ALPHA_TOLERANCE: float = 0.05

    # thinfilm
    WAVELENGTH: float = 522e-9
    OPL_SIGMA: float = 2e-9

    # analysis
    ENSEMBLE_THRESHOLD: float = 0.5
    SCHEMA_VERSION: int = 1


config = AppConfig()
