"""Command-line entry point: python -m app.cli <subcommand> [options]."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import settings
from app.core.exceptions import RelayCodingError
from app.models.channel import ChannelParams
from app.models.requests import RunConfig
from app.services import channel_service, ensemble_service, oracle_service, threshold_service
from app.services.density_evolution_service import de_run
from app.utils import formatters

logger = logging.getLogger("app.cli")

DEFAULT_CAMPAIGN = "3,6;3,9;4,8;3,12;5,10"
TRACES = {"lower_trace", "upper_trace"}


def unit_interval(value: str) -> float:
    """argparse type for a rate strictly between 0 and 1."""
    try:
        rate = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not a number")
    if not 0.0 < rate < 1.0:
        raise argparse.ArgumentTypeError(f"rate must lie in (0, 1), got {value}")
    return rate


def positive_float(value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not a number")
    if number <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return number


def positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not an integer")
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return number


def sigma_grid(value: str) -> Tuple[float, float, float]:
    """Parse `start:stop:step`."""
    parts = value.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {value!r}")
    try:
        start, stop, step = (float(part) for part in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers in start:stop:step, got {value!r}")
    if start <= 0 or stop < start or step <= 0:
        raise argparse.ArgumentTypeError("need 0 < start <= stop and step > 0")
    return start, stop, step


def length_list(value: str) -> List[int]:
    try:
        lengths = [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}")
    if not lengths or min(lengths) < 1:
        raise argparse.ArgumentTypeError("chain lengths must be positive")
    return lengths


def degree_pairs(value: str) -> List[Tuple[int, int]]:
    """Parse `dl,dr;dl,dr;...`."""
    try:
        pairs = [tuple(int(part) for part in item.split(",")) for item in value.split(";") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected dl,dr;dl,dr;..., got {value!r}")
    if not pairs or any(len(pair) != 2 for pair in pairs):
        raise argparse.ArgumentTypeError(f"expected dl,dr;dl,dr;..., got {value!r}")
    return pairs


def bracket(value: str) -> Tuple[float, float]:
    try:
        lo, hi = (float(part) for part in value.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo,hi, got {value!r}")
    return lo, hi


def grid_points(grid: Tuple[float, float, float]) -> np.ndarray:
    start, stop, step = grid
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m app.cli",
        description="Density evolution and BP thresholds of LDPC codes over the two-way relay channel"
    )
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    ensemble = argparse.ArgumentParser(add_help=False)
    ensemble.add_argument("--dl", dest="d_l", type=positive_int, default=3, help="variable degree")
    ensemble.add_argument("--dr", dest="d_r", type=positive_int, default=6, help="check degree")
    ensemble.add_argument("--L", dest="length", type=positive_int, default=None,
                          help="chain length of the coupled protograph")

    de = argparse.ArgumentParser(add_help=False)
    de.add_argument("--N", dest="population_size", type=positive_int, default=None, help="population size")
    de.add_argument("--T", dest="max_iterations", type=positive_int, default=None, help="maximum iterations")
    de.add_argument("--paper-fidelity", action="store_true", help="N=1e5, T=2000 unless given explicitly")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=settings.de_seed, help="root seed")
    common.add_argument("--threads", type=positive_int, default=settings.worker_threads,
                        help="worker threads; 1 is the reference mode")
    common.add_argument("--output", type=Path, default=None, help="output file (stdout if omitted)")

    sir = subparsers.add_parser("sir", parents=[common], help="symmetric information rate")
    target = sir.add_mutually_exclusive_group(required=True)
    target.add_argument("--sigma", type=positive_float, help="C_sym at one noise level")
    target.add_argument("--rate", type=unit_interval, help="sigma_sym of a code rate")
    target.add_argument("--sigma-grid", type=sigma_grid, help="C_sym on start:stop:step")

    trace = subparsers.add_parser("de-trace", parents=[ensemble, de, common], help="per-position BER trace")
    trace.add_argument("--sigma", type=positive_float, required=True, help="noise level")

    threshold = subparsers.add_parser("threshold", parents=[ensemble, de, common], help="BP threshold search")
    threshold.add_argument("--sweep-L", dest="sweep_lengths", type=length_list, default=None,
                           help="comma-separated chain lengths")
    threshold.add_argument("--extrapolate", action="store_true", help="fit sigma_inf + c/L over the sweep")
    threshold.add_argument("--tol", type=positive_float, default=settings.threshold_tolerance,
                           help="final bracket width")
    threshold.add_argument("--bracket", type=bracket, default=None, help="initial sigma_lo,sigma_hi")

    simulate = subparsers.add_parser("simulate", parents=[ensemble, common], help="finite-length BP simulation")
    simulate.add_argument("--n", type=positive_int, default=1000, help="block length")
    simulate.add_argument("--sigma", type=positive_float, default=0.7, help="noise level")
    simulate.add_argument("--trials", type=positive_int, default=10, help="independent trials")
    simulate.add_argument("--iters", type=positive_int, default=settings.oracle_max_iterations,
                          help="BP iterations")
    simulate.add_argument("--ml", action="store_true", help="compare BP with exhaustive ML on one code")
    simulate.add_argument("--per-trial", action="store_true", help="write (trial, iteration, ber) rows")
    simulate.add_argument("--graph-out", type=Path, default=None, help="write the first sampled graph")

    subparsers.add_parser("describe", parents=[ensemble, common], help="JSON dump of an ensemble")

    campaign = subparsers.add_parser("campaign", parents=[de, common], help="thresholds versus rate")
    campaign.add_argument("--ensembles", type=degree_pairs, default=degree_pairs(DEFAULT_CAMPAIGN),
                          help="dl,dr;dl,dr;...")
    campaign.add_argument("--tol", type=positive_float, default=settings.threshold_tolerance,
                          help="final bracket width")

    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        subcommand=args.subcommand,
        d_l=getattr(args, "d_l", 3),
        d_r=getattr(args, "d_r", 6),
        length=getattr(args, "length", None),
        sigma=getattr(args, "sigma", None),
        sigma_grid=getattr(args, "sigma_grid", None),
        rate=getattr(args, "rate", None),
        population_size=getattr(args, "population_size", None),
        max_iterations=getattr(args, "max_iterations", None),
        seed=args.seed,
        paper_fidelity=getattr(args, "paper_fidelity", False),
        threads=args.threads,
        output=args.output
    )


def _ensemble(run: RunConfig) -> ensemble_service.EnsembleSpec:
    if run.length is None:
        return ensemble_service.make_regular(run.d_l, run.d_r, relaxed=True)
    return ensemble_service.make_sc(run.d_l, run.d_r, run.length)


def _de_params(run: RunConfig) -> Dict[str, Any]:
    cfg = run.de_config()
    return {
        "dl": run.d_l,
        "dr": run.d_r,
        "L": run.length,
        "N": cfg.population_size,
        "T": cfg.max_iterations,
        "seed": cfg.seed,
    }


def cmd_sir(args: argparse.Namespace, run: RunConfig) -> None:
    if run.rate is not None:
        text = formatters.render_csv(
            formatters.metadata_header("sir", {"rate": run.rate}),
            ("rate", "sigma_sym"),
            [(run.rate, channel_service.sigma_sym(run.rate))]
        )
    else:
        sigmas = [run.sigma] if run.sigma is not None else grid_points(run.sigma_grid)
        params = {"sigma": run.sigma} if run.sigma is not None else {"sigma_grid": ":".join(
            formatters.format_value(v) for v in run.sigma_grid
        )}
        text = formatters.render_csv(
            formatters.metadata_header("sir", params),
            ("sigma", "c_sym"),
            channel_service.sir_grid(sigmas)
        )
    formatters.write_output(text, run.output)


def cmd_de_trace(args: argparse.Namespace, run: RunConfig) -> None:
    spec = _ensemble(run)
    trace = de_run(spec, ChannelParams(sigma=run.sigma), run.de_config())
    params = _de_params(run) | {"sigma": run.sigma}
    formatters.write_output(formatters.trace_csv(trace, "de-trace", params), run.output)


def cmd_threshold(args: argparse.Namespace, run: RunConfig) -> None:
    cfg = run.de_config()
    params = _de_params(run) | {
        "tol": args.tol,
        "bracket": None if args.bracket is None else ",".join(formatters.format_value(v) for v in args.bracket),
        "sweep_L": None if not args.sweep_lengths else ",".join(str(v) for v in args.sweep_lengths),
        "extrapolate": args.extrapolate,
    }
    if args.sweep_lengths:
        sweep = threshold_service.threshold_sweep(
            run.d_l, run.d_r, args.sweep_lengths, cfg,
            tol=args.tol, bracket=args.bracket,
            extrapolate=True if args.extrapolate else None
        )
        payload = sweep.model_dump(mode="json", exclude={"results": {"__all__": TRACES}})
    else:
        result = threshold_service.bp_threshold(_ensemble(run), cfg, args.bracket, args.tol)
        payload = result.model_dump(mode="json", exclude=TRACES)
    payload = formatters.with_metadata(payload, "threshold", params)
    formatters.write_output(formatters.render_json(payload), run.output)


def cmd_simulate(args: argparse.Namespace, run: RunConfig) -> None:
    ensemble = ensemble_service.make_regular(run.d_l, run.d_r, relaxed=True)
    channel = ChannelParams(sigma=run.sigma)
    params = {
        "dl": run.d_l,
        "dr": run.d_r,
        "n": args.n,
        "sigma": run.sigma,
        "trials": args.trials,
        "iters": args.iters,
        "seed": run.seed,
        "ml": args.ml,
        "per_trial": args.per_trial,
        "graph_out": None if args.graph_out is None else str(args.graph_out),
    }

    if args.ml:
        rng = np.random.default_rng(run.seed)
        graph = oracle_service.sample_tanner_graph(run.d_l, run.d_r, args.n, rng)
        if args.graph_out is not None:
            oracle_service.write_graph(graph, args.graph_out)
        comparison = oracle_service.compare_ml_bp(graph, channel, args.trials, rng, args.iters)
        text = formatters.comparison_csv(comparison, "simulate", params)
    else:
        result = oracle_service.monte_carlo_ber(
            ensemble, args.n, channel, args.trials, args.iters,
            seed=run.seed, threads=run.threads, graph_out=args.graph_out
        )
        text = formatters.simulation_csv(result, "simulate", params, per_trial=args.per_trial)
    formatters.write_output(text, run.output)


def cmd_describe(args: argparse.Namespace, run: RunConfig) -> None:
    params = {"dl": run.d_l, "dr": run.d_r, "L": run.length, "seed": run.seed}
    payload = formatters.with_metadata(ensemble_service.describe(_ensemble(run)), "describe", params)
    formatters.write_output(formatters.render_json(payload), run.output)


def cmd_campaign(args: argparse.Namespace, run: RunConfig) -> None:
    cfg = run.de_config()
    rows = threshold_service.rate_campaign(args.ensembles, cfg, tol=args.tol)
    params = {
        "ensembles": ";".join(f"{d_l},{d_r}" for d_l, d_r in args.ensembles),
        "N": cfg.population_size,
        "T": cfg.max_iterations,
        "seed": cfg.seed,
        "tol": args.tol,
    }
    formatters.write_output(formatters.summary_csv(rows, "campaign", params), run.output)


COMMANDS = {
    "sir": cmd_sir,
    "de-trace": cmd_de_trace,
    "threshold": cmd_threshold,
    "simulate": cmd_simulate,
    "describe": cmd_describe,
    "campaign": cmd_campaign,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments and run one subcommand.

    Returns:
        0 on success, 1 on a domain error; argparse exits with 2 on invalid flags
    """
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    try:
        run = _run_config(args)
        COMMANDS[args.subcommand](args, run)
    except (RelayCodingError, ValueError) as e:
        logger.error(f"{args.subcommand} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1

    return 0


if __name__ == "__main__":
    sys.exit(main())
