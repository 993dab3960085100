"""Pydantic models for run configurations and API requests."""

from pathlib import Path
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from config import settings
from app.models.density import DeConfig


class EnsembleQuery(BaseModel):
    """Ensemble parameters; `length` selects the spatially coupled protograph."""
    d_l: int = Field(default=3, description="Variable node degree", ge=2)
    d_r: int = Field(default=6, description="Check node degree", ge=3)
    length: Optional[int] = Field(None, description="Chain length L of the coupled protograph", ge=1)


class DeParameters(BaseModel):
    """DE parameters shared by trace and threshold requests."""
    population_size: int = Field(default=settings.de_population_size, description="Population size N", ge=100)
    max_iterations: int = Field(default=settings.de_max_iterations, description="Maximum iterations T", ge=1)
    seed: int = Field(default=settings.de_seed, description="Root seed", ge=0)

    @field_validator('population_size')
    @classmethod
    def validate_population_size(cls, v: int) -> int:
        """Validate population size against the API cap."""
        if v > settings.api_max_population_size:
            raise ValueError(f'Population size cannot exceed {settings.api_max_population_size}')
        return v

    def de_config(self) -> DeConfig:
        return DeConfig(
            population_size=self.population_size,
            max_iterations=self.max_iterations,
            seed=self.seed
        )


class DeTraceRequest(EnsembleQuery, DeParameters):
    """Request model for a density-evolution trace."""
    sigma: float = Field(..., description="Noise level", gt=0)


class ThresholdRequest(EnsembleQuery, DeParameters):
    """Request model for a BP-threshold search or coupling sweep."""
    sweep_lengths: Optional[List[int]] = Field(None, description="Chain lengths for a coupling sweep")
    tolerance: float = Field(default=settings.threshold_tolerance, description="Final bracket width", gt=0)
    bracket: Optional[Tuple[float, float]] = Field(None, description="Initial (sigma_lo, sigma_hi)")

    @field_validator('sweep_lengths')
    @classmethod
    def validate_sweep_lengths(cls, v: Optional[List[int]]) -> Optional[List[int]]:
        if v is not None and (not v or min(v) < 1):
            raise ValueError('Sweep lengths must be a non-empty list of positive integers')
        return v


class SimulationRequest(EnsembleQuery):
    """Request model for a finite-length BP simulation."""
    n: int = Field(..., description="Block length", ge=2)
    sigma: float = Field(..., description="Noise level", gt=0)
    trials: int = Field(default=10, description="Independent trials", ge=1, le=1000)
    iterations: int = Field(default=settings.oracle_max_iterations, description="BP iterations", ge=1)
    seed: int = Field(default=settings.de_seed, description="Root seed", ge=0)

    @field_validator('n')
    @classmethod
    def validate_block_length(cls, v: int) -> int:
        """Validate block length against the API cap."""
        if v > settings.api_max_block_length:
            raise ValueError(f'Block length cannot exceed {settings.api_max_block_length}')
        return v


Subcommand = Literal["sir", "de-trace", "threshold", "simulate", "describe", "campaign"]


class RunConfig(BaseModel):
    """Validated parameters of one command-line run."""
    subcommand: Subcommand
    d_l: int = Field(default=3, ge=2)
    d_r: int = Field(default=6, ge=3)
    length: Optional[int] = Field(None, ge=1)
    sigma: Optional[float] = Field(None, gt=0)
    sigma_grid: Optional[Tuple[float, float, float]] = None
    rate: Optional[float] = Field(None, gt=0, lt=1)
    population_size: Optional[int] = Field(None, ge=100)
    max_iterations: Optional[int] = Field(None, ge=1)
    seed: int = Field(default=settings.de_seed, ge=0)
    paper_fidelity: bool = False
    threads: int = Field(default=settings.worker_threads, ge=1)
    output: Optional[Path] = None

    @model_validator(mode='after')
    def validate_sigma_grid(self) -> 'RunConfig':
        if self.sigma_grid is not None:
            start, stop, step = self.sigma_grid
            if start <= 0 or stop < start or step <= 0:
                raise ValueError('sigma grid needs 0 < start <= stop and step > 0')
        return self

    def de_config(self) -> DeConfig:
        """DE configuration: desk or fidelity defaults, with explicit N and T on top."""
        overrides = {"seed": self.seed, "threads": self.threads}
        if self.population_size is not None:
            overrides["population_size"] = self.population_size
        if self.max_iterations is not None:
            overrides["max_iterations"] = self.max_iterations
        if self.paper_fidelity:
            return DeConfig.paper_fidelity(**overrides)
        return DeConfig.desk(**overrides)
