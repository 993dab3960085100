"""Service for the binary two-way relay virtual channel under the IID assumption."""

import functools
import logging
import math
from typing import Protocol

import numpy as np
from scipy import integrate, optimize
from scipy.special import xlogy
from scipy.stats import norm

from config import settings
from app.core.exceptions import BracketError, QuadratureError
from app.models.channel import ChannelParams, QuadratureConfig, VirtualSymbol

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)
SQRT_2PI = math.sqrt(2.0 * math.pi)
SIGMA_SEARCH_RANGE = (1e-3, 1e3)


def _bipolar(bits: np.ndarray) -> np.ndarray:
    return 1.0 - 2.0 * bits


def _gaussian(y, mean: float, s: float):
    u = (np.asarray(y, dtype=float) - mean) / s
    return np.exp(-0.5 * u * u) / (s * SQRT_2PI)


def sample_outputs(z: np.ndarray, params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    """
    Draw relay observations for an array of virtual-channel inputs.

    For z=0 the two terminal symbols agree and the noiseless sum is -2 or +2
    with equal probability; for z=1 they cancel.

    Args:
        z: Array of bits Z = X_A xor X_B
        params: Channel parameters
        rng: Random stream (single consumer)

    Returns:
        Array of observations y with the same shape as z
    """
    z = np.asarray(z, dtype=np.int8)
    x_a = rng.integers(0, 2, size=z.shape, dtype=np.int8)
    x_b = x_a ^ z
    noise = rng.normal(0.0, params.sigma, size=z.shape)
    return _bipolar(x_a) + _bipolar(x_b) + noise


def sample_output(z: int, params: ChannelParams, rng: np.random.Generator) -> float:
    """Draw one relay observation y ~ L[y|z]."""
    return float(sample_outputs(np.array([z]), params, rng)[0])


def sample_symbol(z: int, params: ChannelParams, rng: np.random.Generator) -> VirtualSymbol:
    """One channel use: the input bit paired with its relay observation."""
    return VirtualSymbol(z=z, y=sample_output(z, params, rng))


def likelihood(y, z: int, params: ChannelParams):
    """
    Density L[y|z] of the virtual channel.

    Args:
        y: Observation (scalar or array)
        z: Input bit
        params: Channel parameters

    Returns:
        L[y|1] = F(y; 0, s^2), L[y|0] = (F(y; -2, s^2) + F(y; +2, s^2)) / 2
    """
    s = params.sigma
    if z == 1:
        return _gaussian(y, 0.0, s)
    return 0.5 * _gaussian(y, -2.0, s) + 0.5 * _gaussian(y, 2.0, s)


def log_likelihood(y, z: int, params: ChannelParams):
    """Natural log of L[y|z], stable far into the tails."""
    s = params.sigma
    if z == 1:
        return norm.logpdf(y, loc=0.0, scale=s)
    return np.logaddexp(
        norm.logpdf(y, loc=-2.0, scale=s),
        norm.logpdf(y, loc=2.0, scale=s)
    ) - LN2


def llr(y, params: ChannelParams):
    """
    Symbol LLR ln(L[y|0] / L[y|1]) = ln cosh(2y/s^2) - 2/s^2 in nats.

    ln cosh(a) is evaluated as |a| + ln(1 + exp(-2|a|)) - ln 2 so that large
    |y|/s^2 never overflows.
    """
    inv_var = 1.0 / (params.sigma * params.sigma)
    a = np.abs(2.0 * np.asarray(y, dtype=float) * inv_var)
    value = a + np.log1p(np.exp(-2.0 * a)) - LN2 - 2.0 * inv_var
    return float(value) if np.ndim(value) == 0 else value


def decision_boundary(params: ChannelParams) -> float:
    """|y| at which llr(y) = 0; observations closer to 0 favour z=1."""
    s2 = params.sigma * params.sigma
    # arccosh(exp(x)) = x + ln(1 + sqrt(1 - exp(-2x)))
    x = 2.0 / s2
    return 0.5 * s2 * (x + math.log1p(math.sqrt(-math.expm1(-2.0 * x))))


def uncoded_bit_error_rate(params: ChannelParams) -> float:
    """Symbolwise MAP error of the virtual channel, ties counted as errors."""
    s = params.sigma
    y0 = decision_boundary(params)
    miss_zero = norm.cdf(y0, loc=2.0, scale=s) - norm.cdf(-y0, loc=2.0, scale=s)
    miss_one = 2.0 * norm.sf(y0, loc=0.0, scale=s)
    return 0.5 * float(miss_zero) + 0.5 * float(miss_one)


class ChannelModel(Protocol):
    """Source of channel LLR samples conditioned on the transmitted bit."""

    def sample_llr(self, z: int, size: int, rng: np.random.Generator) -> np.ndarray:
        ...


class TwoWayRelayChannel:
    """LLR source for the asymmetric virtual channel."""

    def __init__(self, params: ChannelParams):
        self.params = params

    def sample_llr(self, z: int, size: int, rng: np.random.Generator) -> np.ndarray:
        y = sample_outputs(np.full(size, z, dtype=np.int8), self.params, rng)
        return llr(y, self.params)


class BpskAwgnChannel:
    """Symmetric BPSK-AWGN reference: mean +1 for z=0, -1 for z=1, LLR 2y/s^2."""

    def __init__(self, sigma: float):
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        self.sigma = sigma

    def sample_llr(self, z: int, size: int, rng: np.random.Generator) -> np.ndarray:
        y = (1.0 - 2.0 * z) + rng.normal(0.0, self.sigma, size=size)
        return 2.0 * y / (self.sigma * self.sigma)


def as_channel_model(channel: ChannelParams | ChannelModel) -> ChannelModel:
    """Wrap bare channel parameters into the virtual-channel LLR source."""
    if isinstance(channel, ChannelParams):
        return TwoWayRelayChannel(channel)
    return channel


def _breakpoints(params: ChannelParams, lo: float, hi: float) -> list[float]:
    s = params.sigma
    points = set()
    for mean in (-2.0, 0.0, 2.0):
        for offset in (0.0, -s, s, -2.0 * s, 2.0 * s, -4.0 * s, 4.0 * s, -8.0 * s, 8.0 * s):
            point = mean + offset
            if lo < point < hi:
                points.add(point)
    return sorted(points)


def _integrate(func, params: ChannelParams, quad: QuadratureConfig) -> float:
    lo, hi = quad.bounds(params.sigma)
    value, _ = integrate.quad(
        func, lo, hi,
        points=_breakpoints(params, lo, hi),
        epsabs=quad.abs_tolerance,
        epsrel=1e-12,
        limit=quad.limit
    )
    return value


def check_normalization(params: ChannelParams, quad: QuadratureConfig) -> None:
    """
    Verify that both likelihoods integrate to 1 under the configured rule.

    Raises:
        QuadratureError: If either integral is off by more than the tolerance
    """
    for z in (0, 1):
        mass = _integrate(lambda y: likelihood(y, z, params), params, quad)
        if abs(mass - 1.0) > quad.normalization_tolerance:
            logger.error(f"Normalization check failed at sigma={params.sigma}: z={z}, mass={mass}")
            raise QuadratureError(mass=mass, z=z)


def symmetric_information_rate(
    params: ChannelParams,
    quad: QuadratureConfig | None = None
) -> float:
    """
    Mutual information of the virtual channel with uniform input, in bits.

    C_sym = h(Y) - h(Y|Z=0)/2 - log2(2*pi*e*s^2)/4, clamped to [0, 1].

    Args:
        params: Channel parameters
        quad: Quadrature rule (defaults from settings)

    Returns:
        Symmetric information rate in bits per channel use

    Raises:
        QuadratureError: If the normalization self-check fails
    """
    quad = quad or QuadratureConfig()
    check_normalization(params, quad)

    def mixture(y):
        return 0.5 * likelihood(y, 0, params) + 0.5 * likelihood(y, 1, params)

    def neg_p_ln_p(y):
        p = mixture(y)
        return -xlogy(p, p)

    def neg_l0_ln_l0(y):
        p = likelihood(y, 0, params)
        return -xlogy(p, p)

    h_y = _integrate(neg_p_ln_p, params, quad) / LN2
    h_y_given_0 = _integrate(neg_l0_ln_l0, params, quad) / LN2
    h_y_given_1 = 0.5 * math.log2(2.0 * math.pi * math.e * params.sigma ** 2)

    rate = h_y - 0.5 * h_y_given_0 - 0.5 * h_y_given_1
    return min(1.0, max(0.0, rate))


def sir_grid(sigmas, quad: QuadratureConfig | None = None) -> list[tuple[float, float]]:
    """C_sym on a grid of noise levels."""
    quad = quad or QuadratureConfig()
    return [
        (float(s), symmetric_information_rate(ChannelParams(sigma=float(s)), quad))
        for s in sigmas
    ]


def sigma_sym(
    rate: float,
    quad: QuadratureConfig | None = None,
    tol: float | None = None
) -> float:
    """
    Noise level at which the symmetric information rate equals the code rate.

    Brent root search on log(sigma) over [1e-3, 1e3]; C_sym is decreasing in sigma.

    Args:
        rate: Code rate in (0, 1)
        quad: Quadrature rule
        tol: Allowed |C_sym(sigma) - rate|

    Returns:
        sigma_sym(rate)

    Raises:
        ValueError: If rate is outside (0, 1)
        BracketError: If C_sym does not straddle rate on the search range
    """
    if not 0.0 < rate < 1.0:
        raise ValueError(f"rate must lie in (0, 1), got {rate}")
    quad = quad or QuadratureConfig()
    tol = settings.sigma_sym_tolerance if tol is None else tol

    @functools.cache
    def gap(log_sigma: float) -> float:
        params = ChannelParams(sigma=math.exp(log_sigma))
        return symmetric_information_rate(params, quad) - rate

    lo, hi = (math.log(s) for s in SIGMA_SEARCH_RANGE)
    if not (gap(lo) > 0.0 > gap(hi)):
        logger.error(f"C_sym does not straddle rate {rate} on sigma in {SIGMA_SEARCH_RANGE}")
        raise BracketError(f"C_sym does not straddle rate {rate} on sigma in {SIGMA_SEARCH_RANGE}")

    # C_sym moves by less than one bit per unit of ln(sigma) near any root
    root = optimize.brentq(gap, lo, hi, xtol=0.25 * tol, maxiter=200)
    if abs(gap(root)) > tol:
        raise BracketError(f"Root search stalled at |C_sym - rate| = {abs(gap(root)):.3e} > {tol}")

    sigma = math.exp(root)
    logger.info(f"sigma_sym({rate:.6f}) = {sigma:.6f} after {gap.cache_info().currsize} evaluations")
    return sigma
