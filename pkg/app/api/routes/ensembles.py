"""Ensemble description API routes."""

import logging
from typing import Any, Dict, Optional

from fastapi import APIRouter, HTTPException, Query, status

from app.core.exceptions import RelayCodingError
from app.services import ensemble_service

logger = logging.getLogger(__name__)

router = APIRouter()


@router.get(
    "/describe",
    summary="Describe an ensemble",
    description="Degrees, adjacency and design rate of a regular ensemble or (d_l, d_r, L) protograph"
)
async def describe_ensemble(
    d_l: int = Query(3, description="Variable node degree"),
    d_r: int = Query(6, description="Check node degree"),
    length: Optional[int] = Query(None, description="Chain length L; omit for the regular ensemble")
) -> Dict[str, Any]:
    try:
        if length is None:
            spec = ensemble_service.make_regular(d_l, d_r, relaxed=True)
        else:
            spec = ensemble_service.make_sc(d_l, d_r, length)
        return ensemble_service.describe(spec)

    except RelayCodingError as e:
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail=e.message
        )
