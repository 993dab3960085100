"""Density evolution API routes."""

import logging

from fastapi import APIRouter, HTTPException, status
from starlette.concurrency import run_in_threadpool

from app.core.exceptions import RelayCodingError
from app.models.channel import ChannelParams
from app.models.requests import DeTraceRequest
from app.models.responses import DeTraceResponse
from app.services import ensemble_service
from app.services.density_evolution_service import de_run

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post(
    "/trace",
    response_model=DeTraceResponse,
    summary="Run density evolution",
    description="Per-iteration, per-position BER of population-dynamics DE and the decodability verdict"
)
async def run_trace(request: DeTraceRequest):
    """
    Run DE for a regular ensemble, or a coupled protograph when `length` is set.

    Returns:
        DeTraceResponse with the BER history
    """
    try:
        if request.length is None:
            spec = ensemble_service.make_regular(request.d_l, request.d_r, relaxed=True)
        else:
            spec = ensemble_service.make_sc(request.d_l, request.d_r, request.length)

        trace = await run_in_threadpool(
            de_run, spec, ChannelParams(sigma=request.sigma), request.de_config()
        )
        logger.info(f"DE trace {trace.label}: {trace.iterations} iterations, decodable={trace.decodable}")
        return DeTraceResponse(trace=trace)

    except RelayCodingError as e:
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail=e.message
        )

    except Exception as e:
        logger.error(f"DE trace failed: {e}")
        raise HTTPException(
            status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
            detail=f"Failed to run density evolution: {str(e)}"
        )
