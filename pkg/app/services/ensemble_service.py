"""Service for constructing and validating regular and spatially coupled ensembles."""

import logging
from typing import Any, Dict

from app.core.exceptions import InvalidChainError, InvalidDegreeError
from app.models.ensemble import EdgeClass, EdgeGraph, RegularEnsemble, ScProtograph

logger = logging.getLogger(__name__)

EnsembleSpec = RegularEnsemble | ScProtograph


def make_regular(d_l: int, d_r: int, relaxed: bool = False) -> RegularEnsemble:
    """
    Build a validated (d_l, d_r)-regular ensemble.

    Args:
        d_l: Variable degree, at least 2
        d_r: Check degree, larger than d_l
        relaxed: Accept d_r not divisible by d_l (plain regular DE only)

    Returns:
        RegularEnsemble

    Raises:
        InvalidDegreeError: If the degrees violate the constraints
    """
    if d_l < 2 or d_r <= d_l:
        logger.error(f"Rejected degrees d_l={d_l}, d_r={d_r}")
        raise InvalidDegreeError(d_l, d_r, f"Need d_l >= 2 and d_r > d_l, got ({d_l},{d_r})")

    divisible = d_r % d_l == 0
    if not divisible and not relaxed:
        raise InvalidDegreeError(d_l, d_r, f"k = d_r/d_l = {d_r}/{d_l} is not an integer")

    return RegularEnsemble(d_l=d_l, d_r=d_r, sc_compatible=divisible)


def make_sc(d_l: int, d_r: int, length: int) -> ScProtograph:
    """
    Build the (d_l, d_r, L) spatially coupled protograph.

    Args:
        d_l: Variable degree (odd)
        d_r: Check degree, a multiple of d_l
        length: Chain length L

    Returns:
        ScProtograph

    Raises:
        InvalidDegreeError: If degrees are invalid or d_l is even
        InvalidChainError: If L < 1
    """
    make_regular(d_l, d_r)
    if d_l % 2 == 0:
        raise InvalidDegreeError(d_l, d_r, f"d_l = {d_l} is even; (d_l-1)/2 must be an integer")
    if length < 1:
        raise InvalidChainError(length)

    protograph = ScProtograph(d_l=d_l, d_r=d_r, length=length)
    if protograph.is_degenerate:
        logger.warning(
            f"Protograph {protograph.label} has non-positive design rate {design_rate(protograph):.4f}"
        )
    return protograph


def design_rate(spec: EnsembleSpec) -> float:
    """Design rate 1 - (L + 2*d_hat)/(k*L) for protographs, 1 - d_l/d_r otherwise."""
    if isinstance(spec, RegularEnsemble):
        return spec.design_rate
    return 1.0 - spec.check_count / spec.variable_count


def uncoupled_rate(spec: EnsembleSpec) -> float:
    """Design rate of the underlying uncoupled ensemble."""
    return 1.0 - spec.d_l / spec.d_r


def build_edge_graph(spec: EnsembleSpec) -> EdgeGraph:
    """
    Compile an ensemble into the edge-class skeleton used by density evolution.

    A regular ensemble is one edge class with multiplicity d_l and d_r sockets.
    A protograph has one class per (bundle, check) pair within distance d_hat,
    each with multiplicity 1 and k sockets.
    """
    if isinstance(spec, RegularEnsemble):
        return EdgeGraph(
            label=spec.label,
            positions=(1,),
            edges=(EdgeClass(bundle=1, check=1, var_multiplicity=spec.d_l, check_sockets=spec.d_r),)
        )

    edges = tuple(
        EdgeClass(bundle=i, check=a, var_multiplicity=1, check_sockets=spec.k)
        for i in spec.bundles
        for a in spec.bundle_neighbors(i)
    )
    return EdgeGraph(label=spec.label, positions=tuple(spec.bundles), edges=edges)


def make_uncoupled(d_l: int, d_r: int, copies: int = 1) -> EdgeGraph:
    """
    Disconnected copies of the uncoupled protograph: k variables and one check,
    each variable joined to the check by d_l parallel edges.
    """
    ensemble = make_regular(d_l, d_r)
    if copies < 1:
        raise InvalidChainError(copies)
    k = ensemble.d_r // ensemble.d_l
    edges = tuple(
        EdgeClass(bundle=i, check=i, var_multiplicity=d_l, check_sockets=k * d_l)
        for i in range(1, copies + 1)
    )
    return EdgeGraph(
        label=f"{ensemble.label}x{copies}",
        positions=tuple(range(1, copies + 1)),
        edges=edges
    )


def describe(spec: EnsembleSpec) -> Dict[str, Any]:
    """JSON-ready description of degrees, adjacency and design rate."""
    if isinstance(spec, RegularEnsemble):
        return {
            "kind": "regular",
            "d_l": spec.d_l,
            "d_r": spec.d_r,
            "sc_compatible": spec.sc_compatible,
            "design_rate": spec.design_rate,
        }

    return {
        "kind": "spatially_coupled",
        "d_l": spec.d_l,
        "d_r": spec.d_r,
        "L": spec.length,
        "k": spec.k,
        "d_hat": spec.d_hat,
        "variable_count": spec.variable_count,
        "check_count": spec.check_count,
        "design_rate": design_rate(spec),
        "degenerate": spec.is_degenerate,
        "bundles": [
            {"index": i, "size": spec.k, "checks": spec.bundle_neighbors(i)}
            for i in spec.bundles
        ],
        "checks": [
            {"index": a, "degree": spec.check_degree(a), "bundles": spec.check_neighbors(a)}
            for a in spec.checks
        ],
    }
