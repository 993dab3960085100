from pydantic_settings import BaseSettings, SettingsConfigDict
from pathlib import Path


class Settings(BaseSettings):
    """Toolkit configuration settings loaded from environment variables."""

    # Application Settings
    app_host: str = "0.0.0.0"
    app_port: int = 8000
    app_debug: bool = False
    app_version: str = "1.0.0"

    # API Settings
    api_prefix: str = "/api/v1"
    api_max_population_size: int = 20_000
    api_max_block_length: int = 20_000

    # Density Evolution (desk scale)
    de_population_size: int = 10_000
    de_max_iterations: int = 1000
    de_seed: int = 20180815
    de_message_clip: float = 50.0
    de_zero_streak: int = 10
    de_target_ber: float = 0.0

    # High-fidelity profile (--paper-fidelity)
    fidelity_population_size: int = 100_000
    fidelity_max_iterations: int = 2000

    # Quadrature
    quad_half_width: float = 12.0
    quad_abs_tolerance: float = 1e-11
    quad_normalization_tolerance: float = 1e-9

    # Threshold search
    threshold_tolerance: float = 1e-3
    sigma_sym_tolerance: float = 1e-6

    # Finite-length oracle
    oracle_max_iterations: int = 200
    oracle_exact_codeword_limit: int = 4096
    oracle_ml_max_dimension: int = 20
    oracle_parallel_edge_retries: int = 100

    # Execution
    worker_threads: int = 1
    results_dir: str = "results"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    @property
    def results_path(self) -> Path:
        """Get absolute path to results directory."""
        return Path(self.results_dir).resolve()


# Global settings instance
settings = Settings()
