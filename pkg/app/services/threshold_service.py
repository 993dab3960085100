"""Service for BP-threshold search, coupling sweeps and L extrapolation."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from config import settings
from app.core.exceptions import BracketError, DegenerateFitError
from app.models.channel import ChannelParams
from app.models.density import DeConfig, DeTrace
from app.models.responses import (
    CouplingSweep,
    Extrapolation,
    SummaryRow,
    ThresholdProbe,
    ThresholdResult
)
from app.services.channel_service import sigma_sym
from app.services.density_evolution_service import de_run
from app.services.ensemble_service import (
    EnsembleSpec,
    design_rate,
    make_regular,
    make_sc,
    uncoupled_rate
)

logger = logging.getLogger(__name__)


def is_decodable(spec: EnsembleSpec, sigma: float, cfg: DeConfig | None = None) -> Tuple[bool, DeTrace]:
    """
    Run DE at one noise level and report the zero-BER streak verdict.

    Args:
        spec: Ensemble or protograph
        sigma: Noise level
        cfg: DE configuration

    Returns:
        Tuple of (verdict, trace)
    """
    trace = de_run(spec, ChannelParams(sigma=sigma), cfg or DeConfig())
    return trace.decodable, trace


def default_bracket(spec: EnsembleSpec) -> Tuple[float, float]:
    """Search bracket straddling every threshold of the rate-1/2 or rate-2/3 family."""
    if uncoupled_rate(spec) < 0.6:
        return 0.4, 1.0
    return 0.3, 0.9


def _find_non_monotone(probes: Sequence[ThresholdProbe]) -> bool:
    decodable = [p.sigma for p in probes if p.decodable]
    undecodable = [p.sigma for p in probes if not p.decodable]
    return bool(decodable and undecodable and max(decodable) > min(undecodable))


def bp_threshold(
    spec: EnsembleSpec,
    cfg: DeConfig | None = None,
    bracket: Optional[Tuple[float, float]] = None,
    tol: float | None = None
) -> ThresholdResult:
    """
    Bisect on sigma between a decodable and an undecodable DE run.

    A bracket that fails validation is widened once by its own width on the
    failing side.

    Args:
        spec: Ensemble or protograph
        cfg: DE configuration used by every probe
        bracket: (sigma_lo, sigma_hi), defaults to default_bracket(spec)
        tol: Final bracket width

    Returns:
        ThresholdResult with witnesses, probe log and midpoint

    Raises:
        BracketError: If the bracket is still invalid after widening
    """
    cfg = cfg or DeConfig()
    tol = settings.threshold_tolerance if tol is None else tol
    lo, hi = bracket or default_bracket(spec)
    if not 0.0 < lo < hi:
        raise BracketError(f"Invalid bracket ({lo}, {hi})")

    label = spec.label
    probes: List[ThresholdProbe] = []

    def probe(sigma: float) -> Tuple[bool, DeTrace]:
        verdict, trace = is_decodable(spec, sigma, cfg)
        probes.append(ThresholdProbe(
            sigma=sigma,
            decodable=verdict,
            iterations=trace.iterations,
            final_ber=trace.final_ber,
            decoded_at=trace.decoded_at
        ))
        logger.info(f"{label} probe sigma={sigma:.5f}: {'decodable' if verdict else 'not decodable'}")
        return verdict, trace

    lo_ok, lo_trace = probe(lo)
    hi_ok, hi_trace = probe(hi)

    if not lo_ok or hi_ok:
        width = hi - lo
        if not lo_ok:
            lo = max(lo - width, lo / 2.0)
            lo_ok, lo_trace = probe(lo)
        if hi_ok:
            hi = hi + width
            hi_ok, hi_trace = probe(hi)
        if not lo_ok or hi_ok:
            logger.error(f"{label}: bracket ({lo}, {hi}) invalid after widening")
            raise BracketError(
                f"Threshold bracket for {label} invalid after widening: "
                f"sigma_lo={lo} decodable={lo_ok}, sigma_hi={hi} decodable={hi_ok}"
            )

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        verdict, trace = probe(mid)
        if verdict:
            lo, lo_trace = mid, trace
        else:
            hi, hi_trace = mid, trace

    non_monotone = _find_non_monotone(probes)
    if non_monotone:
        logger.warning(f"{label}: decodability is not monotone across probes")

    result = ThresholdResult(
        label=label,
        lower=lo,
        upper=hi,
        estimate=0.5 * (lo + hi),
        tolerance=tol,
        design_rate=design_rate(spec),
        config=cfg,
        probes=probes,
        non_monotone=non_monotone,
        bias_note=(
            f"T={cfg.max_iterations} iterations per probe; runs that would decode after T "
            f"are reported undecodable, so the estimate is biased low"
        ),
        lower_trace=lo_trace,
        upper_trace=hi_trace
    )
    logger.info(f"{label}: sigma* in [{lo:.5f}, {hi:.5f}] after {len(probes)} probes")
    return result


def extrapolate_threshold(points: Iterable[Tuple[int, float]]) -> Extrapolation:
    """
    Least-squares fit of sigma*(L) = sigma_inf + c/L.

    Args:
        points: (L, sigma*_L) pairs

    Returns:
        Extrapolation with sigma_inf, c, residuals and the raw points

    Raises:
        DegenerateFitError: With fewer than 3 points or fewer than 2 distinct L
    """
    points = list(points)
    lengths = np.array([p[0] for p in points], dtype=float)
    thresholds = np.array([p[1] for p in points], dtype=float)
    if len(points) < 3 or len(np.unique(lengths)) < 2:
        raise DegenerateFitError()

    design = np.column_stack([np.ones_like(lengths), 1.0 / lengths])
    (sigma_inf, slope), *_ = np.linalg.lstsq(design, thresholds, rcond=None)
    residuals = thresholds - design @ np.array([sigma_inf, slope])

    return Extrapolation(
        sigma_inf=float(sigma_inf),
        slope=float(slope),
        lengths=[int(length) for length in lengths],
        thresholds=thresholds.tolist(),
        residuals=residuals.tolist()
    )


def _sigma_sym_or_none(rate: float) -> Optional[float]:
    return sigma_sym(rate) if 0.0 < rate < 1.0 else None


def summary_row(result: ThresholdResult, length: Optional[int] = None) -> SummaryRow:
    """Collapse a search result into a CSV row; sigma_sym is left empty for rates outside (0, 1)."""
    return SummaryRow(
        ensemble=result.label,
        length=length,
        rate=result.design_rate,
        sigma_star=result.estimate,
        sigma_sym=_sigma_sym_or_none(result.design_rate)
    )


def threshold_sweep(
    d_l: int,
    d_r: int,
    lengths: Sequence[int],
    cfg: DeConfig | None = None,
    tol: float | None = None,
    bracket: Optional[Tuple[float, float]] = None,
    extrapolate: Optional[bool] = None
) -> CouplingSweep:
    """
    Thresholds of (d_l, d_r, L) protographs for each L, plus the 1/L extrapolation.

    Searches at different L run concurrently when cfg.threads > 1; each
    search is then sequential. With extrapolate=None the fit runs whenever
    there are 3 or more distinct L; extrapolate=True requires it.

    Raises:
        DegenerateFitError: If extrapolate=True and the sweep is too small
    """
    cfg = cfg or DeConfig()
    protographs = [make_sc(d_l, d_r, length) for length in lengths]

    if cfg.threads > 1 and len(protographs) > 1:
        sequential = cfg.model_copy(update={"threads": 1})
        with ThreadPoolExecutor(max_workers=cfg.threads) as executor:
            results = list(executor.map(
                lambda p: bp_threshold(p, sequential, bracket, tol), protographs
            ))
    else:
        results = [bp_threshold(p, cfg, bracket, tol) for p in protographs]

    rows = [summary_row(result, p.length) for result, p in zip(results, protographs)]
    for row in rows:
        if row.sigma_sym is not None and row.sigma_star >= row.sigma_sym:
            logger.warning(f"{row.ensemble}: sigma*={row.sigma_star:.4f} not below sigma_sym={row.sigma_sym:.4f}")

    extrapolation = None
    if extrapolate or (extrapolate is None and len(set(lengths)) >= 3):
        extrapolation = extrapolate_threshold((row.length, row.sigma_star) for row in rows)
        logger.info(f"({d_l},{d_r},L): extrapolated sigma_inf = {extrapolation.sigma_inf:.4f}")

    return CouplingSweep(rows=rows, results=results, extrapolation=extrapolation)


def rate_campaign(
    ensembles: Sequence[Tuple[int, int]],
    cfg: DeConfig | None = None,
    tol: float | None = None
) -> List[SummaryRow]:
    """Thresholds of several regular ensembles versus rate, with sigma_sym for each rate."""
    rows = []
    for d_l, d_r in ensembles:
        ensemble = make_regular(d_l, d_r, relaxed=True)
        result = bp_threshold(ensemble, cfg, tol=tol)
        rows.append(summary_row(result))
    return rows
