"""Utilities for formatting results as CSV with metadata headers or as JSON."""

import csv
import io
import json
import shlex
from pathlib import Path
from typing import Any, Iterable, List, Mapping, Optional, Sequence

from pydantic import BaseModel

from config import settings
from app.models.density import DeTrace
from app.models.oracle import MlComparison, MonteCarloResult
from app.models.responses import SummaryRow

TOOL_NAME = "relay-de"


def format_value(value: Any) -> str:
    """Render one CSV cell; floats keep 12 significant digits, None is empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def command_echo(command: str, params: Mapping[str, Any]) -> str:
    """
    Command line that reproduces a run, rebuilt from its parameters in sorted order.

    True flags become bare switches; False and None are left out.
    """
    parts = [command]
    for key, value in sorted(params.items()):
        if value is None or value is False:
            continue
        flag = f"--{key.replace('_', '-')}"
        parts.append(flag if value is True else f"{flag} {shlex.quote(format_value(value))}")
    return " ".join(parts)


def metadata_header(command: str, params: Mapping[str, Any]) -> List[str]:
    """`#`-prefixed header lines: tool version, command echo and every parameter."""
    lines = [
        f"# tool: {TOOL_NAME} {settings.app_version}",
        f"# command: {command_echo(command, params)}",
    ]
    lines.extend(f"# {key}: {format_value(value)}" for key, value in sorted(params.items()))
    return lines


def metadata_block(command: str, params: Mapping[str, Any]) -> dict:
    """The same header as a JSON object, for structured outputs."""
    return {
        "tool": f"{TOOL_NAME} {settings.app_version}",
        "command": command_echo(command, params),
        "params": dict(sorted(params.items())),
    }


def with_metadata(
    payload: BaseModel | Mapping[str, Any],
    command: str,
    params: Mapping[str, Any]
) -> dict:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return dict(payload) | {"metadata": metadata_block(command, params)}


def render_csv(
    header: Sequence[str],
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]]
) -> str:
    buffer = io.StringIO()
    for line in header:
        buffer.write(line + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(value) for value in row])
    return buffer.getvalue()


def render_json(payload: BaseModel | Mapping[str, Any] | Sequence[Any]) -> str:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    elif isinstance(payload, Sequence) and payload and isinstance(payload[0], BaseModel):
        payload = [item.model_dump(mode="json") for item in payload]
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_output(text: str, path: Optional[Path]) -> None:
    """Write to a file (creating parent directories), or to stdout when path is None."""
    if path is None:
        print(text, end="")
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def trace_csv(trace: DeTrace, command: str, params: Mapping[str, Any]) -> str:
    header = metadata_header(command, params)
    header.append(f"# decodable: {format_value(trace.decodable)}")
    header.append(f"# decoded_at: {format_value(trace.decoded_at)}")
    header.append(f"# iterations: {trace.iterations}")
    return render_csv(header, ("iteration", "position", "ber"), trace.rows())


def summary_csv(rows: Sequence[SummaryRow], command: str, params: Mapping[str, Any]) -> str:
    return render_csv(
        metadata_header(command, params),
        ("ensemble", "L", "rate", "sigma_star", "sigma_sym"),
        ((row.ensemble, row.length, row.rate, row.sigma_star, row.sigma_sym) for row in rows)
    )


def simulation_csv(
    result: MonteCarloResult,
    command: str,
    params: Mapping[str, Any],
    per_trial: bool = False
) -> str:
    header = metadata_header(command, params)
    header.append(f"# fer: {format_value(result.fer)}")
    header.append(f"# fer_se: {format_value(result.fer_se)}")
    header.append(f"# parallel_edges: {result.parallel_edges}")
    if per_trial:
        return render_csv(header, ("trial", "iteration", "ber"), result.rows())
    rows = (
        (iteration + 1, ber, se)
        for iteration, (ber, se) in enumerate(zip(result.ber, result.ber_se))
    )
    return render_csv(header, ("iteration", "ber", "ber_se"), rows)


def comparison_csv(comparison: MlComparison, command: str, params: Mapping[str, Any]) -> str:
    header = metadata_header(command, params)
    header.append(f"# dimension: {comparison.dimension}")
    rows = [
        ("ml", comparison.ml_fer, comparison.ml_se),
        ("bp", comparison.bp_fer, comparison.bp_se),
    ]
    return render_csv(header, ("decoder", "fer", "fer_se"), rows)
