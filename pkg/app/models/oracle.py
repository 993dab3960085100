"""Pydantic models for finite-length codes, decoding outcomes and Monte Carlo results."""

from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import sparse

from app.models.arrays import NdArray


class TannerGraph(BaseModel):
    """
    A concrete (d_l, d_r)-regular Tanner graph.

    `check_vars[c]` lists the variable attached to each of the d_r sockets of
    check c, so the flattened array is the check-major edge list.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int = Field(..., description="Block length", ge=1)
    m: int = Field(..., description="Check count", ge=1)
    d_l: int = Field(..., ge=1)
    d_r: int = Field(..., ge=1)
    check_vars: NdArray
    parallel_edges: int = Field(0, description="Parallel edges left after local resampling", ge=0)

    @property
    def edge_count(self) -> int:
        return self.m * self.d_r

    @property
    def edge_vars(self) -> np.ndarray:
        return self.check_vars.ravel()

    def variable_degrees(self) -> np.ndarray:
        return np.bincount(self.edge_vars, minlength=self.n)

    def parity_check_matrix(self) -> np.ndarray:
        """H over GF(2); a parallel edge pair cancels."""
        rows = np.repeat(np.arange(self.m), self.d_r)
        counts = sparse.coo_matrix(
            (np.ones(self.edge_count, dtype=np.int64), (rows, self.edge_vars)),
            shape=(self.m, self.n)
        ).toarray()
        return (counts % 2).astype(np.uint8)

    def syndrome(self, word) -> np.ndarray:
        word = np.asarray(word, dtype=np.int64)
        return (word[self.check_vars].sum(axis=1) % 2).astype(np.uint8)

    def is_codeword(self, word) -> bool:
        return not self.syndrome(word).any()


class CodewordPair(BaseModel):
    """Codewords chosen by the two terminals."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x_a: NdArray
    x_b: NdArray

    @property
    def z(self) -> np.ndarray:
        return self.x_a ^ self.x_b

    def swapped(self) -> "CodewordPair":
        return CodewordPair(x_a=self.x_b, x_b=self.x_a)


class DecodeResult(BaseModel):
    """Outcome of one BP decode: final estimate and packed hard decisions per iteration."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    estimate: NdArray
    decisions: Tuple[NdArray, ...] = Field(..., description="np.packbits of each iteration's decision")
    converged: bool

    @property
    def iterations(self) -> int:
        return len(self.decisions)

    def decision(self, iteration: int) -> np.ndarray:
        """Hard decision after `iteration` (counted from 1)."""
        return np.unpackbits(self.decisions[iteration - 1], count=self.estimate.size)

    def bit_errors(self, z: np.ndarray, iterations: Optional[int] = None) -> np.ndarray:
        """
        Bit errors against z for iterations 1..iterations; after an early stop
        the final decision is carried forward.
        """
        iterations = iterations or self.iterations
        z = np.asarray(z, dtype=np.uint8)
        reference = np.packbits(z)
        counts = np.empty(iterations, dtype=np.int64)
        for i in range(iterations):
            packed = self.decisions[min(i, self.iterations - 1)]
            counts[i] = int(np.unpackbits(packed ^ reference, count=z.size).sum())
        return counts


class MonteCarloResult(BaseModel):
    """Per-iteration BER and final FER of a finite-length BP experiment."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    label: str
    n: int
    sigma: float
    trials: int
    iterations: int
    seed: int
    trial_ber: NdArray = Field(..., description="Shape (trials, iterations)")
    ber: List[float]
    ber_se: List[float]
    fer: float
    fer_se: float
    parallel_edges: int = Field(0, description="Total residual parallel edges over all trials")

    def rows(self) -> List[Tuple[int, int, float]]:
        """(trial, iteration, ber) rows, both counted from 1."""
        return [
            (trial + 1, iteration + 1, float(self.trial_ber[trial, iteration]))
            for trial in range(self.trials)
            for iteration in range(self.iterations)
        ]


class MlComparison(BaseModel):
    """Block-error rates of exhaustive ML and BP on one small code."""
    n: int
    dimension: int
    sigma: float
    trials: int
    ml_fer: float
    ml_se: float
    bp_fer: float
    bp_se: float

    @property
    def combined_se(self) -> float:
        return float(np.hypot(self.ml_se, self.bp_se))
