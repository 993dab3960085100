"""Pydantic models for population-dynamics density evolution."""

from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from config import settings
from app.models.arrays import NdArray
from app.models.ensemble import EdgeGraph

Direction = Literal["variable_to_check", "check_to_variable"]


class DeConfig(BaseModel):
    """Population dynamics parameters."""
    model_config = ConfigDict(frozen=True)

    population_size: int = Field(
        default=settings.de_population_size,
        description="Population size N",
        ge=100
    )
    max_iterations: int = Field(
        default=settings.de_max_iterations,
        description="Maximum iteration T",
        ge=1
    )
    seed: int = Field(default=settings.de_seed, description="Root seed", ge=0, lt=2 ** 64)
    message_clip: float = Field(
        default=settings.de_message_clip,
        description="Message clip bound M_max in nats",
        gt=0
    )
    ber_samples: Optional[int] = Field(
        default=None,
        description="Full-message draws per bit value for BER estimation (defaults to N)",
        ge=1
    )
    zero_streak: int = Field(
        default=settings.de_zero_streak,
        description="Consecutive iterations at target BER that declare decodability",
        ge=1
    )
    target_ber: float = Field(default=settings.de_target_ber, description="Target BER", ge=0)
    threads: int = Field(default=settings.worker_threads, description="Worker threads", ge=1)

    @property
    def estimator_samples(self) -> int:
        return self.ber_samples or self.population_size

    @classmethod
    def desk(cls, **overrides) -> "DeConfig":
        return cls(**overrides)

    @classmethod
    def paper_fidelity(cls, **overrides) -> "DeConfig":
        values = {
            "population_size": settings.fidelity_population_size,
            "max_iterations": settings.fidelity_max_iterations,
        }
        values.update(overrides)
        return cls(**values)


class Population(BaseModel):
    """A bag of LLR samples approximating one conditional message density."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    samples: NdArray
    z: int = Field(..., ge=0, le=1)
    direction: Direction
    bundle: int
    check: int

    @property
    def size(self) -> int:
        return int(self.samples.shape[0])


class DeState(BaseModel):
    """
    All populations of one DE run.

    `var` and `chk` have shape (edges, 2, N): variable->check and
    check->variable samples per edge class and conditioning bit.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    graph: EdgeGraph
    config: DeConfig
    var: np.ndarray
    chk: np.ndarray
    var_streams: Tuple[Tuple[np.random.Generator, np.random.Generator], ...]
    chk_streams: Tuple[Tuple[np.random.Generator, np.random.Generator], ...]
    iteration: int = 0

    @property
    def population_count(self) -> int:
        return int(self.var.shape[0] * self.var.shape[1] + self.chk.shape[0] * self.chk.shape[1])

    def population(self, direction: Direction, edge: int, z: int) -> Population:
        """View of one population."""
        source = self.var if direction == "variable_to_check" else self.chk
        edge_class = self.graph.edges[edge]
        return Population(
            samples=source[edge, z],
            z=z,
            direction=direction,
            bundle=edge_class.bundle,
            check=edge_class.check
        )

    def populations(self) -> List[Population]:
        return [
            self.population(direction, edge, z)
            for direction in ("variable_to_check", "check_to_variable")
            for edge in range(len(self.graph.edges))
            for z in (0, 1)
        ]


class DeTrace(BaseModel):
    """Per-iteration, per-position BER estimates of a DE run and its verdict."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    label: str
    sigma: Optional[float] = None
    positions: Tuple[int, ...]
    ber: NdArray = Field(..., description="Shape (iterations, positions)")
    decodable: bool
    decoded_at: Optional[int] = Field(None, description="First iteration of the final zero-BER streak")
    config: DeConfig

    @property
    def iterations(self) -> int:
        return int(self.ber.shape[0])

    @property
    def max_ber(self) -> np.ndarray:
        """Worst-position BER per iteration."""
        return self.ber.max(axis=1)

    @property
    def final_ber(self) -> float:
        return float(self.ber[-1].max())

    def rows(self) -> List[Tuple[int, int, float]]:
        """(iteration, position, ber) rows, iterations counted from 1."""
        return [
            (iteration + 1, position, float(self.ber[iteration, p]))
            for iteration in range(self.iterations)
            for p, position in enumerate(self.positions)
        ]
