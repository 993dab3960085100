"""Finite-length oracle: sample regular codes, transmit over the relay channel, decode with BP or ML."""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from config import settings
from app.core.exceptions import (
    DimensionTooLargeError,
    RelayCodingError,
    SizeMismatchError
)
from app.models.channel import ChannelParams
from app.models.ensemble import RegularEnsemble
from app.models.oracle import CodewordPair, DecodeResult, MlComparison, MonteCarloResult, TannerGraph
from app.services.channel_service import llr, log_likelihood
from app.services.density_evolution_service import tanh_rule
from app.services.ensemble_service import make_regular
from app.utils import gf2

logger = logging.getLogger(__name__)

ML_CHUNK = 1 << 14


def _duplicate_mask(check_vars: np.ndarray) -> np.ndarray:
    """True at every socket whose variable already appears at an earlier socket of the same check."""
    d_r = check_vars.shape[1]
    same = check_vars[:, :, None] == check_vars[:, None, :]
    earlier = np.tril(np.ones((d_r, d_r), dtype=bool), k=-1)
    return (same & earlier).any(axis=2)


def _resample_parallel_edges(
    check_vars: np.ndarray,
    rng: np.random.Generator,
    retries: int,
    socket_types: Optional[np.ndarray] = None
) -> int:
    """
    Swap each parallel-edge socket with a random partner socket (of the same
    type when types are given) until no check repeats a variable.

    Returns:
        Number of parallel edges left after the retry budget
    """
    m, d_r = check_vars.shape
    flat = check_vars.reshape(-1)
    pools = None
    if socket_types is not None:
        pools = {int(t): np.flatnonzero(socket_types == t) for t in np.unique(socket_types)}

    for _ in range(retries):
        rows, cols = np.nonzero(_duplicate_mask(check_vars))
        if rows.size == 0:
            return 0
        for row, col in zip(rows, cols):
            socket = row * d_r + col
            if pools is None:
                partner = int(rng.integers(0, flat.size))
            else:
                pool = pools[int(socket_types[socket])]
                partner = int(pool[rng.integers(0, pool.size)])
            other = partner // d_r
            if other == row:
                continue
            var, other_var = flat[socket], flat[partner]
            if var in check_vars[other] or other_var in check_vars[row]:
                continue
            flat[socket], flat[partner] = other_var, var

    return int(_duplicate_mask(check_vars).sum())


def _check_count(d_l: int, d_r: int, n: int) -> int:
    make_regular(d_l, d_r, relaxed=True)
    if n < 1 or (n * d_l) % d_r:
        logger.error(f"Block length {n} incompatible with ({d_l},{d_r})")
        raise SizeMismatchError(n, d_l, d_r)
    return n * d_l // d_r


def sample_tanner_graph(
    d_l: int,
    d_r: int,
    n: int,
    rng: np.random.Generator,
    retries: int | None = None
) -> TannerGraph:
    """
    Configuration-model sample of the (d_l, d_r)-regular ensemble.

    Args:
        d_l: Variable degree
        d_r: Check degree
        n: Block length, n*d_l divisible by d_r
        rng: Random stream
        retries: Parallel-edge resampling rounds

    Returns:
        TannerGraph, with `parallel_edges` > 0 if resampling gave up

    Raises:
        SizeMismatchError: If n*d_l is not divisible by d_r
    """
    m = _check_count(d_l, d_r, n)
    retries = settings.oracle_parallel_edge_retries if retries is None else retries

    check_vars = rng.permutation(np.repeat(np.arange(n), d_l)).reshape(m, d_r)
    remaining = _resample_parallel_edges(check_vars, rng, retries)
    if remaining:
        logger.warning(f"({d_l},{d_r}) n={n}: {remaining} parallel edges left after {retries} rounds")

    return TannerGraph(n=n, m=m, d_l=d_l, d_r=d_r, check_vars=check_vars, parallel_edges=remaining)


def code_basis(graph: TannerGraph) -> Tuple[np.ndarray, int]:
    """
    Null-space basis of H over GF(2).

    Returns:
        Tuple of (basis of shape (n - rank, n), rank of H)
    """
    basis = gf2.null_space(graph.parity_check_matrix())
    return basis, graph.n - basis.shape[0]


def codeword_sampler(
    graph: TannerGraph,
    rng: np.random.Generator,
    basis: np.ndarray | None = None
) -> CodewordPair:
    """Two independent uniform codewords as random combinations of a null-space basis."""
    if basis is None:
        basis, rank = code_basis(graph)
        logger.debug(f"Code n={graph.n}: rank(H)={rank}, dimension={basis.shape[0]}")
    coefficients = rng.integers(0, 2, size=(2, basis.shape[0]))
    x_a, x_b = gf2.combine(coefficients, basis)
    return CodewordPair(x_a=x_a, x_b=x_b)


def sample_planted_code(
    d_l: int,
    d_r: int,
    n: int,
    rng: np.random.Generator,
    retries: int | None = None
) -> Tuple[TannerGraph, CodewordPair]:
    """
    Sample a regular graph jointly with a codeword pair, for block lengths
    where elimination is too expensive.

    Each check socket gets a type (x_A bit, z bit), drawn uniformly subject to
    even parity of both bits over the check. Type counts are then brought to
    multiples of d_l with parity-preserving moves inside one check: a pair of
    sockets of types (0, 1) and (1, 0) becomes (1, 1) and (0, 0), and a pair of
    same-typed sockets becomes (0, 0). Sockets are finally matched to variables
    of the same type.

    Raises:
        SizeMismatchError: If n*d_l is not divisible by d_r
        RelayCodingError: If no check offers a balancing move
    """
    m = _check_count(d_l, d_r, n)
    retries = settings.oracle_parallel_edge_retries if retries is None else retries

    def even_parity_bits() -> np.ndarray:
        free = rng.integers(0, 2, size=(m, d_r - 1), dtype=np.int8)
        return np.concatenate([free, (free.sum(axis=1) % 2)[:, None].astype(np.int8)], axis=1)

    types = 2 * even_parity_bits() + even_parity_bits()

    def pick_row(mask: np.ndarray) -> int:
        rows = np.flatnonzero(mask)
        if rows.size == 0:
            raise RelayCodingError(f"Cannot balance socket types for ({d_l},{d_r}) n={n}")
        return int(rows[rng.integers(0, rows.size)])

    # Per-check parity makes the three nonzero type counts share one parity
    if d_l % 2 == 0 and np.count_nonzero(types == 1) % 2:
        row = pick_row((types == 1).any(axis=1) & (types == 2).any(axis=1))
        types[row, np.flatnonzero(types[row] == 1)[0]] = 3
        types[row, np.flatnonzero(types[row] == 2)[0]] = 0

    # 2 * half = 1 mod d_l for odd d_l
    half = (d_l + 1) // 2
    for t in (1, 2, 3):
        excess = int(np.count_nonzero(types == t)) % d_l
        moves = excess * half % d_l if d_l % 2 else excess // 2
        for _ in range(moves):
            row = pick_row((types == t).sum(axis=1) >= 2)
            types[row, np.flatnonzero(types[row] == t)[:2]] = 0

    socket_types = types.reshape(-1)
    var_counts = np.bincount(socket_types, minlength=4) // d_l
    var_types = rng.permutation(np.repeat(np.arange(4), var_counts))

    flat = np.empty(m * d_r, dtype=np.int64)
    for t in range(4):
        sockets = np.flatnonzero(socket_types == t)
        flat[sockets] = rng.permutation(np.repeat(np.flatnonzero(var_types == t), d_l))
    check_vars = flat.reshape(m, d_r)

    remaining = _resample_parallel_edges(check_vars, rng, retries, socket_types)
    if remaining:
        logger.warning(f"Planted ({d_l},{d_r}) n={n}: {remaining} parallel edges left")

    graph = TannerGraph(n=n, m=m, d_l=d_l, d_r=d_r, check_vars=check_vars, parallel_edges=remaining)
    x_a = (var_types >> 1).astype(np.uint8)
    z = (var_types & 1).astype(np.uint8)
    return graph, CodewordPair(x_a=x_a, x_b=x_a ^ z)


def sample_code(d_l: int, d_r: int, n: int, rng: np.random.Generator) -> Tuple[TannerGraph, CodewordPair]:
    """Exact codeword sampling up to oracle_exact_codeword_limit, planted sampling above."""
    if n <= settings.oracle_exact_codeword_limit:
        graph = sample_tanner_graph(d_l, d_r, n, rng)
        return graph, codeword_sampler(graph, rng)
    return sample_planted_code(d_l, d_r, n, rng)


def transmit(pair: CodewordPair, channel: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    """Relay observation y_t = mu(x_A,t) + mu(x_B,t) + w_t with mu(b) = 1 - 2b."""
    noise = rng.normal(0.0, channel.sigma, size=pair.x_a.size)
    return (1.0 - 2.0 * pair.x_a) + (1.0 - 2.0 * pair.x_b) + noise


def bp_decode(
    graph: TannerGraph,
    y: np.ndarray,
    channel: ChannelParams,
    max_iters: int | None = None,
    clip: float | None = None
) -> DecodeResult:
    """
    Flooding sum-product decoding of z in the log domain.

    Each iteration updates every check from the current variable messages
    (all zero at the start) and then records the hard decision of the
    marginals, so iteration 1 decides on the channel LLR alone.
    A marginal of exactly zero decides z=0. Such ties have probability zero
    for continuous observations, so this rule and the half-error tie count of
    density evolution agree in distribution.

    Args:
        graph: Tanner graph
        y: Relay observations, one per variable
        channel: Channel parameters
        max_iters: Iteration cap
        clip: Message clip bound

    Returns:
        DecodeResult with packed per-iteration decisions; stops early on a zero syndrome
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (graph.n,):
        raise ValueError(f"Expected {graph.n} observations, got shape {y.shape}")
    max_iters = settings.oracle_max_iterations if max_iters is None else max_iters
    clip = settings.de_message_clip if clip is None else clip

    channel_llr = llr(y, channel)
    edge_vars = graph.edge_vars
    ones = np.ones((graph.m, 1))
    v2c = np.zeros(graph.edge_count)
    decisions = []
    decision = (channel_llr < 0).astype(np.uint8)
    converged = False

    for _ in range(max_iters):
        t = np.tanh(v2c / 2.0).reshape(graph.m, graph.d_r)
        before = np.cumprod(np.hstack([ones, t[:, :-1]]), axis=1)
        after = np.cumprod(np.hstack([ones, t[:, :0:-1]]), axis=1)[:, ::-1]
        c2v = tanh_rule(before * after, clip).ravel()

        total = np.bincount(edge_vars, weights=c2v, minlength=graph.n)
        marginal = channel_llr + total
        decision = (marginal < 0).astype(np.uint8)
        decisions.append(np.packbits(decision))
        if graph.is_codeword(decision):
            converged = True
            break
        v2c = np.clip(marginal[edge_vars] - c2v, -clip, clip)

    return DecodeResult(estimate=decision, decisions=tuple(decisions), converged=converged)


def _lexicographically_less(word: np.ndarray, other: np.ndarray) -> bool:
    differ = np.flatnonzero(word != other)
    return bool(differ.size) and word[differ[0]] < other[differ[0]]


def ml_decode_exhaustive(
    graph: TannerGraph,
    y: np.ndarray,
    channel: ChannelParams,
    basis: np.ndarray | None = None,
    max_dimension: int | None = None
) -> np.ndarray:
    """
    IID-assumption ML decoding by enumerating every codeword.

    Args:
        graph: Tanner graph
        y: Relay observations
        channel: Channel parameters
        basis: Precomputed null-space basis (computed from graph otherwise)
        max_dimension: Enumeration limit on the code dimension

    Returns:
        argmax_c sum_t ln L[y_t|c_t], the lexicographically smallest on ties

    Raises:
        DimensionTooLargeError: If the code dimension exceeds the limit
    """
    if basis is None:
        basis, _ = code_basis(graph)
    limit = settings.oracle_ml_max_dimension if max_dimension is None else max_dimension
    dimension = basis.shape[0]
    if dimension > limit:
        logger.error(f"ML enumeration refused: dimension {dimension} > {limit}")
        raise DimensionTooLargeError(dimension, limit)

    y = np.asarray(y, dtype=float)
    # sum_t ln L[y_t|c_t] = const + c . gain
    gain = log_likelihood(y, 1, channel) - log_likelihood(y, 0, channel)
    shifts = np.arange(dimension)[::-1]

    best_score = -np.inf
    best_word = None
    for start in range(0, 1 << dimension, ML_CHUNK):
        index = np.arange(start, min(start + ML_CHUNK, 1 << dimension))
        words = gf2.combine((index[:, None] >> shifts) & 1, basis)
        scores = words @ gain
        top = scores.max()
        if top < best_score:
            continue
        tied = words[scores == top]
        candidate = tied[np.lexsort(tied.T[::-1])[0]]
        if top > best_score or _lexicographically_less(candidate, best_word):
            best_score, best_word = top, candidate

    return best_word


def _run_trial(
    ensemble: RegularEnsemble,
    n: int,
    channel: ChannelParams,
    iters: int,
    seed: int,
    trial: int,
    graph_out: Optional[Path]
) -> Tuple[np.ndarray, bool, int]:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))
    graph, pair = sample_code(ensemble.d_l, ensemble.d_r, n, rng)
    if trial == 0 and graph_out is not None:
        write_graph(graph, graph_out)
    y = transmit(pair, channel, rng)
    result = bp_decode(graph, y, channel, iters)
    z = pair.z
    frame_error = not result.converged or bool(np.any(result.estimate != z))
    return result.bit_errors(z, iters), frame_error, graph.parallel_edges


def monte_carlo_ber(
    ensemble: RegularEnsemble,
    n: int,
    channel: ChannelParams,
    trials: int,
    iters: int | None = None,
    seed: int | None = None,
    threads: int | None = None,
    graph_out: Optional[Path] = None
) -> MonteCarloResult:
    """
    Average BP outcomes over fresh graphs, codewords and noise.

    Trial t draws everything from its own stream SeedSequence(seed, spawn_key=(t,)),
    so results do not depend on the thread count.

    Args:
        ensemble: Regular ensemble
        n: Block length
        channel: Channel parameters
        trials: Number of independent trials
        iters: BP iterations per trial
        seed: Root seed
        threads: Concurrent trials
        graph_out: Where to write the first trial's graph

    Returns:
        MonteCarloResult with per-iteration BER, final FER and binomial standard errors
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    iters = settings.oracle_max_iterations if iters is None else iters
    seed = settings.de_seed if seed is None else seed
    threads = settings.worker_threads if threads is None else threads

    def run(trial: int):
        return _run_trial(ensemble, n, channel, iters, seed, trial, graph_out)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            outcomes = list(executor.map(run, range(trials)))
    else:
        outcomes = [run(trial) for trial in range(trials)]

    trial_ber = np.vstack([errors for errors, _, _ in outcomes]) / n
    frame_errors = sum(frame_error for _, frame_error, _ in outcomes)
    ber = trial_ber.mean(axis=0)
    ber_se = np.sqrt(ber * (1.0 - ber) / (trials * n))
    fer = frame_errors / trials

    result = MonteCarloResult(
        label=ensemble.label,
        n=n,
        sigma=channel.sigma,
        trials=trials,
        iterations=iters,
        seed=seed,
        trial_ber=trial_ber,
        ber=ber.tolist(),
        ber_se=ber_se.tolist(),
        fer=fer,
        fer_se=float(np.sqrt(fer * (1.0 - fer) / trials)),
        parallel_edges=sum(parallel for _, _, parallel in outcomes)
    )
    logger.info(
        f"BP {ensemble.label} n={n} sigma={channel.sigma}: final BER {ber[-1]:.3e} "
        f"+- {ber_se[-1]:.1e}, FER {fer:.3f} over {trials} trials"
    )
    return result


def compare_ml_bp(
    graph: TannerGraph,
    channel: ChannelParams,
    trials: int,
    rng: np.random.Generator,
    max_iters: int | None = None
) -> MlComparison:
    """Block-error rates of exhaustive ML and BP on the same codewords and noise."""
    basis, _ = code_basis(graph)
    ml_errors = 0
    bp_errors = 0
    for _ in range(trials):
        pair = codeword_sampler(graph, rng, basis)
        y = transmit(pair, channel, rng)
        z = pair.z
        bp = bp_decode(graph, y, channel, max_iters)
        ml = ml_decode_exhaustive(graph, y, channel, basis)
        bp_errors += bool(np.any(bp.estimate != z))
        ml_errors += bool(np.any(ml != z))

    ml_fer = ml_errors / trials
    bp_fer = bp_errors / trials
    comparison = MlComparison(
        n=graph.n,
        dimension=basis.shape[0],
        sigma=channel.sigma,
        trials=trials,
        ml_fer=ml_fer,
        ml_se=float(np.sqrt(ml_fer * (1.0 - ml_fer) / trials)),
        bp_fer=bp_fer,
        bp_se=float(np.sqrt(bp_fer * (1.0 - bp_fer) / trials))
    )
    logger.info(f"n={graph.n} sigma={channel.sigma}: ML FER {ml_fer:.4f}, BP FER {bp_fer:.4f}")
    return comparison


def graph_to_text(graph: TannerGraph) -> str:
    """Header `n m d_l d_r`, then one line per check listing its variables."""
    lines = [f"{graph.n} {graph.m} {graph.d_l} {graph.d_r}"]
    lines.extend(" ".join(str(v) for v in row) for row in graph.check_vars.tolist())
    return "\n".join(lines) + "\n"


def graph_from_text(text: str) -> TannerGraph:
    """
    Parse the text written by graph_to_text.

    Raises:
        ValueError: If the check rows do not match the header
    """
    lines = [line.split() for line in text.strip().splitlines() if line.strip()]
    n, m, d_l, d_r = (int(value) for value in lines[0])
    check_vars = np.array(lines[1:], dtype=np.int64)
    if check_vars.shape != (m, d_r):
        raise ValueError(f"Expected {m} checks of degree {d_r}, got shape {check_vars.shape}")
    return TannerGraph(
        n=n, m=m, d_l=d_l, d_r=d_r,
        check_vars=check_vars,
        parallel_edges=int(_duplicate_mask(check_vars).sum())
    )


def write_graph(graph: TannerGraph, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(graph_to_text(graph), encoding="utf-8")
    logger.info(f"Wrote graph n={graph.n} to {path}")


def read_graph(path: Path) -> TannerGraph:
    """Load a graph saved with write_graph."""
    return graph_from_text(Path(path).read_text(encoding="utf-8"))
