"""BP threshold API routes."""

import logging

from fastapi import APIRouter, HTTPException, status
from starlette.concurrency import run_in_threadpool

from app.core.exceptions import BracketError, RelayCodingError
from app.models.requests import ThresholdRequest
from app.models.responses import CouplingSweep, ThresholdResult
from app.services import ensemble_service, threshold_service

logger = logging.getLogger(__name__)

router = APIRouter()


def _unprocessable(e: RelayCodingError) -> HTTPException:
    return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=e.message)


@router.post(
    "",
    response_model=ThresholdResult,
    summary="Search a BP threshold",
    description="Bisection on sigma between a decodable and an undecodable DE run"
)
async def search_threshold(request: ThresholdRequest):
    try:
        if request.length is None:
            spec = ensemble_service.make_regular(request.d_l, request.d_r, relaxed=True)
        else:
            spec = ensemble_service.make_sc(request.d_l, request.d_r, request.length)

        return await run_in_threadpool(
            threshold_service.bp_threshold,
            spec, request.de_config(), request.bracket, request.tolerance
        )

    except BracketError as e:
        logger.error(f"Threshold search failed: {e.message}")
        raise _unprocessable(e)

    except RelayCodingError as e:
        raise _unprocessable(e)


@router.post(
    "/sweep",
    response_model=CouplingSweep,
    summary="Sweep chain lengths",
    description="Thresholds of (d_l, d_r, L) protographs over several L with the 1/L extrapolation"
)
async def sweep_thresholds(request: ThresholdRequest):
    if not request.sweep_lengths:
        raise HTTPException(
            status_code=status.HTTP_400_BAD_REQUEST,
            detail="sweep_lengths is required"
        )

    try:
        return await run_in_threadpool(
            threshold_service.threshold_sweep,
            request.d_l, request.d_r, request.sweep_lengths,
            request.de_config(), request.tolerance, request.bracket
        )

    except RelayCodingError as e:
        logger.error(f"Coupling sweep failed: {e.message}")
        raise _unprocessable(e)
