"""Pydantic models for the virtual two-way relay channel."""

from pydantic import BaseModel, ConfigDict, Field

from config import settings


class ChannelParams(BaseModel):
    """Noise level of the virtual two-way relay channel."""
    model_config = ConfigDict(frozen=True)

    sigma: float = Field(..., description="Noise standard deviation of W", gt=0)


class VirtualSymbol(BaseModel):
    """One use of the virtual channel: Z = X_A xor X_B in, relay observation Y out."""
    model_config = ConfigDict(frozen=True)

    z: int = Field(..., description="XOR of the two terminal bits", ge=0, le=1)
    y: float = Field(..., description="Relay observation")


class QuadratureConfig(BaseModel):
    """Integration rule for information-rate computations."""
    model_config = ConfigDict(frozen=True)

    half_width: float = Field(
        default=settings.quad_half_width,
        description="Integration half-width in units of sigma beyond the outer means +-2",
        gt=0
    )
    abs_tolerance: float = Field(
        default=settings.quad_abs_tolerance,
        description="Absolute tolerance of the adaptive rule",
        gt=0
    )
    normalization_tolerance: float = Field(
        default=settings.quad_normalization_tolerance,
        description="Allowed deviation of each likelihood's integral from 1",
        gt=0
    )
    limit: int = Field(default=500, description="Maximum adaptive subintervals", ge=50)

    def bounds(self, sigma: float) -> tuple[float, float]:
        """Integration interval [-2 - w*sigma, 2 + w*sigma]."""
        reach = 2.0 + self.half_width * sigma
        return -reach, reach
