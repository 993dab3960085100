"""Finite-length simulation API routes."""

import logging

from fastapi import APIRouter, HTTPException, status
from starlette.concurrency import run_in_threadpool

from app.core.exceptions import RelayCodingError
from app.models.channel import ChannelParams
from app.models.oracle import MonteCarloResult
from app.models.requests import SimulationRequest
from app.services import ensemble_service, oracle_service

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post(
    "",
    response_model=MonteCarloResult,
    summary="Simulate BP decoding",
    description="Per-iteration BER and FER of BP on sampled (d_l, d_r)-regular codes"
)
async def simulate(request: SimulationRequest):
    """
    Monte Carlo over fresh graphs, codeword pairs and noise.

    Returns:
        MonteCarloResult with binomial standard errors
    """
    try:
        ensemble = ensemble_service.make_regular(request.d_l, request.d_r, relaxed=True)
        return await run_in_threadpool(
            oracle_service.monte_carlo_ber,
            ensemble, request.n, ChannelParams(sigma=request.sigma),
            request.trials, request.iterations, request.seed
        )

    except RelayCodingError as e:
        logger.error(f"Simulation rejected: {e.message}")
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail=e.message
        )
