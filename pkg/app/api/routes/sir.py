"""Symmetric information rate API routes."""

import logging
from typing import Optional

from fastapi import APIRouter, HTTPException, Query, status
from starlette.concurrency import run_in_threadpool

from app.core.exceptions import RelayCodingError
from app.models.channel import ChannelParams
from app.models.responses import SirPoint, SirResponse
from app.services.channel_service import sigma_sym, symmetric_information_rate

logger = logging.getLogger(__name__)

router = APIRouter()


@router.get(
    "",
    response_model=SirResponse,
    summary="Symmetric information rate",
    description="C_sym at a noise level, or the noise level sigma_sym at which C_sym equals a rate"
)
async def get_sir(
    sigma: Optional[float] = Query(None, description="Noise level", gt=0),
    rate: Optional[float] = Query(None, description="Code rate", gt=0, lt=1)
):
    """
    Exactly one of `sigma` and `rate` must be given.

    Returns:
        SirResponse with one (sigma, C_sym) point
    """
    if (sigma is None) == (rate is None):
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail="Give exactly one of sigma and rate"
        )

    try:
        if rate is not None:
            point = SirPoint(sigma=await run_in_threadpool(sigma_sym, rate), rate=rate)
        else:
            value = await run_in_threadpool(symmetric_information_rate, ChannelParams(sigma=sigma))
            point = SirPoint(sigma=sigma, rate=value)
        return SirResponse(points=[point])

    except RelayCodingError as e:
        logger.error(f"SIR computation failed: {e.message}")
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail=e.message
        )
