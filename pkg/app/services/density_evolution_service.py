"""Population-dynamics density evolution for the asymmetric virtual channel."""

import logging
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from typing import Optional

import numpy as np

from config import settings
from app.models.channel import ChannelParams
from app.models.density import DeConfig, DeState, DeTrace
from app.models.ensemble import EdgeGraph
from app.services.channel_service import ChannelModel, as_channel_model
from app.services.ensemble_service import EnsembleSpec, build_edge_graph

logger = logging.getLogger(__name__)

ATANH_GUARD = 1.0 - 1e-15

# spawn-key prefixes of the per-population streams
VARIABLE_STREAM = 0
CHECK_STREAM = 1
ESTIMATOR_STREAM = 2


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _as_edge_graph(spec: EnsembleSpec | EdgeGraph) -> EdgeGraph:
    return spec if isinstance(spec, EdgeGraph) else build_edge_graph(spec)


def _channel_sigma(channel) -> Optional[float]:
    if isinstance(channel, ChannelParams):
        return channel.sigma
    params = getattr(channel, "params", None)
    if params is not None:
        return params.sigma
    return getattr(channel, "sigma", None)


def tanh_rule(product, clip: float):
    """2*atanh(product), guarded away from +-1 and clipped to +-clip."""
    guarded = np.clip(product, -ATANH_GUARD, ATANH_GUARD)
    return np.clip(2.0 * np.arctanh(guarded), -clip, clip)


def check_update_sample(incoming, clip: float | None = None) -> float:
    """
    Tanh rule of one check node: 2*atanh(prod tanh(m_s/2)), clipped to +-M_max.

    Args:
        incoming: Messages on the other sockets (nats)
        clip: Clip bound (defaults to settings.de_message_clip)

    Returns:
        Outgoing check message
    """
    clip = settings.de_message_clip if clip is None else clip
    values = np.asarray(incoming, dtype=float)
    product = np.prod(np.tanh(values / 2.0))
    return float(tanh_rule(product, clip))


def sample_socket_bits(z: int, sockets: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """
    Draw conditioning bits for the non-target sockets of a check.

    The first sockets-1 bits are uniform, the last one is set so that the
    XOR over all sockets together with the target bit z is 0.

    Returns:
        int8 array of shape (size, sockets)
    """
    if sockets < 1:
        raise ValueError("a check update needs at least one incoming socket")
    free = rng.integers(0, 2, size=(size, sockets - 1), dtype=np.int8)
    last = (z + free.sum(axis=1, dtype=np.int64)) % 2
    return np.concatenate([free, last[:, None].astype(np.int8)], axis=1)


def de_init(spec: EnsembleSpec | EdgeGraph, cfg: DeConfig | None = None) -> DeState:
    """
    Zero-initialized populations with one seeded stream per population and direction.

    Args:
        spec: Regular ensemble, protograph, or compiled edge graph
        cfg: DE configuration

    Returns:
        DeState at iteration 0
    """
    cfg = cfg or DeConfig()
    graph = _as_edge_graph(spec)
    shape = (len(graph.edges), 2, cfg.population_size)

    var_streams = tuple(
        (_stream(cfg.seed, VARIABLE_STREAM, e, 0), _stream(cfg.seed, VARIABLE_STREAM, e, 1))
        for e in range(len(graph.edges))
    )
    chk_streams = tuple(
        (_stream(cfg.seed, CHECK_STREAM, e, 0), _stream(cfg.seed, CHECK_STREAM, e, 1))
        for e in range(len(graph.edges))
    )

    state = DeState(
        graph=graph,
        config=cfg,
        var=np.zeros(shape),
        chk=np.zeros(shape),
        var_streams=var_streams,
        chk_streams=chk_streams
    )
    logger.debug(f"Initialized {state.population_count} populations of size {cfg.population_size} for {graph.label}")
    return state


def _run_all(tasks, executor: ThreadPoolExecutor | None) -> None:
    if executor is None:
        for task in tasks:
            task()
    else:
        # consume the iterator so worker exceptions propagate
        list(executor.map(lambda task: task(), tasks))


def de_iterate(
    state: DeState,
    channel: ChannelParams | ChannelModel,
    executor: ThreadPoolExecutor | None = None
) -> DeState:
    """
    One synchronous sweep: check populations from the previous variable
    populations, then variable populations from the new check populations.

    Args:
        state: Current state (its streams advance)
        channel: Channel parameters or any LLR source
        executor: Optional pool for data-parallel population updates

    Returns:
        New DeState with the iteration counter incremented
    """
    model = as_channel_model(channel)
    graph = state.graph
    cfg = state.config
    n = cfg.population_size
    clip = cfg.message_clip

    tanh_var = np.tanh(state.var / 2.0)
    chk_new = np.empty_like(state.chk)
    var_new = np.empty_like(state.var)

    def check_task(e: int, z: int):
        def run():
            rng = state.chk_streams[e][z]
            inputs = graph.check_inputs[e]
            sockets = sum(count for _, count in inputs)
            bits = sample_socket_bits(z, sockets, n, rng)
            product = np.ones(n)
            column = 0
            for edge, count in inputs:
                for _ in range(count):
                    idx = rng.integers(0, n, size=n)
                    product *= tanh_var[edge, bits[:, column], idx]
                    column += 1
            chk_new[e, z] = tanh_rule(product, clip)
        return run

    def variable_task(e: int, z: int):
        def run():
            rng = state.var_streams[e][z]
            message = model.sample_llr(z, n, rng)
            for edge, count in graph.variable_inputs[e]:
                for _ in range(count):
                    idx = rng.integers(0, n, size=n)
                    message = message + chk_new[edge, z, idx]
            var_new[e, z] = np.clip(message, -clip, clip)
        return run

    keys = [(e, z) for e in range(len(graph.edges)) for z in (0, 1)]
    _run_all([check_task(e, z) for e, z in keys], executor)
    _run_all([variable_task(e, z) for e, z in keys], executor)

    return state.model_copy(update={
        "var": var_new,
        "chk": chk_new,
        "iteration": state.iteration + 1
    })


def estimate_ber(
    state: DeState,
    channel: ChannelParams | ChannelModel,
    cfg: DeConfig | None = None,
    rng: np.random.Generator | None = None
) -> np.ndarray:
    """
    Per-position BER from fresh full-message samples.

    Each draw is m = channel LLR + one sample from every incoming
    check->variable population. BER = (Pr[m<0|z=0] + Pr[m>0|z=1]) / 2 with
    m = 0 counted as half an error.

    Returns:
        Array of BER estimates, one per position
    """
    model = as_channel_model(channel)
    cfg = cfg or state.config
    if rng is None:
        rng = _stream(cfg.seed, ESTIMATOR_STREAM, state.iteration)
    samples = cfg.estimator_samples
    n = state.config.population_size

    ber = np.empty(len(state.graph.positions))
    for p, inputs in enumerate(state.graph.position_inputs):
        total = 0.0
        for z in (0, 1):
            message = model.sample_llr(z, samples, rng)
            for edge, count in inputs:
                for _ in range(count):
                    message = message + state.chk[edge, z, rng.integers(0, n, size=samples)]
            wrong = np.count_nonzero(message < 0) if z == 0 else np.count_nonzero(message > 0)
            ties = np.count_nonzero(message == 0)
            total += (wrong + 0.5 * ties) / samples
        ber[p] = 0.5 * total
    return ber


def de_run(
    spec: EnsembleSpec | EdgeGraph,
    channel: ChannelParams | ChannelModel,
    cfg: DeConfig | None = None
) -> DeTrace:
    """
    Iterate DE up to T times, recording BER after every sweep.

    Stops early and declares the ensemble decodable once the worst-position
    BER stays at or below the target for K consecutive iterations (all T
    iterations when T < K).

    Args:
        spec: Ensemble, protograph, or compiled edge graph
        channel: Channel parameters or any LLR source
        cfg: DE configuration

    Returns:
        DeTrace with the BER history and verdict
    """
    cfg = cfg or DeConfig()
    model = as_channel_model(channel)
    state = de_init(spec, cfg)
    estimator = _stream(cfg.seed, ESTIMATOR_STREAM)
    required = min(cfg.zero_streak, cfg.max_iterations)

    history = []
    streak = 0
    decoded_at = None
    pool = ThreadPoolExecutor(max_workers=cfg.threads) if cfg.threads > 1 else nullcontext()

    with pool as executor:
        for _ in range(cfg.max_iterations):
            state = de_iterate(state, model, executor)
            ber = estimate_ber(state, model, cfg, estimator)
            history.append(ber)

            streak = streak + 1 if ber.max() <= cfg.target_ber else 0
            if state.iteration % 100 == 0:
                logger.debug(f"{state.graph.label} iteration {state.iteration}: max BER {ber.max():.3e}")
            if streak >= required:
                decoded_at = state.iteration - streak + 1
                break

    trace = DeTrace(
        label=state.graph.label,
        sigma=_channel_sigma(channel),
        positions=state.graph.positions,
        ber=np.vstack(history),
        decodable=decoded_at is not None,
        decoded_at=decoded_at,
        config=cfg
    )

    if trace.decodable:
        logger.info(f"DE {trace.label} sigma={trace.sigma}: decodable, zero BER from iteration {decoded_at}")
    else:
        logger.info(
            f"DE {trace.label} sigma={trace.sigma}: not decodable after {trace.iterations} iterations "
            f"(final max BER {trace.final_ber:.3e})"
        )
    return trace
