"""Pydantic models for results and API responses."""

from typing import List, Optional

from pydantic import BaseModel, Field

from app.models.density import DeConfig, DeTrace


class SirPoint(BaseModel):
    """Symmetric information rate at one noise level."""
    sigma: float = Field(..., description="Noise standard deviation")
    rate: float = Field(..., description="C_sym(sigma) in bits per channel use")


class SirResponse(BaseModel):
    """Response for information-rate queries."""
    points: List[SirPoint] = Field(..., description="(sigma, C_sym) pairs")


class ThresholdProbe(BaseModel):
    """One DE decodability probe of a threshold search."""
    sigma: float = Field(..., description="Probed noise level")
    decodable: bool = Field(..., description="Zero-BER streak verdict")
    iterations: int = Field(..., description="Iterations run")
    final_ber: float = Field(..., description="Worst-position BER at the last iteration")
    decoded_at: Optional[int] = Field(None, description="First iteration of the zero-BER streak")


class ThresholdResult(BaseModel):
    """Bisection bracket of a BP threshold."""
    label: str = Field(..., description="Ensemble label")
    lower: float = Field(..., description="Largest decodable sigma found")
    upper: float = Field(..., description="Smallest undecodable sigma found")
    estimate: float = Field(..., description="Bracket midpoint")
    tolerance: float = Field(..., description="Requested bracket width")
    design_rate: float = Field(..., description="Design rate of the ensemble")
    config: DeConfig = Field(..., description="DE configuration of every probe")
    probes: List[ThresholdProbe] = Field(..., description="Probe log in evaluation order")
    non_monotone: bool = Field(False, description="A decodable probe lies above an undecodable one")
    bias_note: str = Field(..., description="Known bias of the estimate")
    lower_trace: Optional[DeTrace] = Field(None, description="Trace of the decodable witness")
    upper_trace: Optional[DeTrace] = Field(None, description="Trace of the undecodable witness")


class Extrapolation(BaseModel):
    """Least-squares fit sigma*(L) = sigma_inf + c/L."""
    sigma_inf: float = Field(..., description="Limit as L grows")
    slope: float = Field(..., description="Coefficient c of 1/L")
    lengths: List[int] = Field(..., description="Chain lengths of the raw points")
    thresholds: List[float] = Field(..., description="Raw sigma*(L) values")
    residuals: List[float] = Field(..., description="Fit residuals per point")
    family: str = Field("sigma_inf + c/L", description="Fit family")


class SummaryRow(BaseModel):
    """One CSV summary row: ensemble, L, rate, sigma*, sigma_sym."""
    ensemble: str = Field(..., description="Ensemble label")
    length: Optional[int] = Field(None, description="Chain length, empty for uncoupled ensembles")
    rate: float = Field(..., description="Design rate")
    sigma_star: float = Field(..., description="BP threshold estimate")
    sigma_sym: Optional[float] = Field(None, description="sigma_sym(rate); empty when rate <= 0")

    @property
    def gap(self) -> Optional[float]:
        return None if self.sigma_sym is None else self.sigma_sym - self.sigma_star


class CouplingSweep(BaseModel):
    """Thresholds of (d_l, d_r, L) protographs over several L."""
    rows: List[SummaryRow] = Field(..., description="One row per chain length")
    results: List[ThresholdResult] = Field(..., description="Full search results per chain length")
    extrapolation: Optional[Extrapolation] = Field(None, description="1/L extrapolation when possible")


class DeTraceResponse(BaseModel):
    """Response for a density-evolution trace."""
    trace: DeTrace = Field(..., description="Per-iteration, per-position BER")


class HealthCheckResponse(BaseModel):
    """Response for health check endpoint."""
    status: str = Field(..., description="Service status")
    version: str = Field(..., description="Toolkit version")
    worker_threads: int = Field(..., description="Configured worker threads")
