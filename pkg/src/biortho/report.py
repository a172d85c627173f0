"""Flat key-value and JSON rendering of command reports.

Text output is a header of ``# key = value`` lines closed by the delimiter
line ``# ---`` followed by one ``name = value`` line per result.  Floats are
written with 17 significant digits so the text round-trips exactly.  The JSON
form is ``{"header": {...}, "body": {...}}`` with the same keys.  Nothing
time- or host-dependent is emitted, so identical runs give identical bytes.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

HEADER_DELIMITER = "# ---"


def flatten(data: dict, prefix: str = "") -> dict:
    out: dict[str, Any] = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(flatten(value, name + "."))
        else:
            out[name] = plain(value)
    return out


def plain(value):
    """Convert numpy scalars/arrays and nested lists to JSON-friendly values."""
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, dict):
        return {k: plain(v) for k, v in value.items()}
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return str(value)
        return f"{value:.17g}"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, (list, dict)):
        return json.dumps(value, separators=(",", ":"))
    return str(value)


def render_text(header: dict, body: dict) -> str:
    lines = [f"# {k} = {format_value(v)}" for k, v in flatten(header).items()]
    lines.append(HEADER_DELIMITER)
    lines += [f"{k} = {format_value(v)}" for k, v in flatten(body).items()]
    return "\n".join(lines) + "\n"


def render_json(header: dict, body: dict) -> str:
    return json.dumps({"header": flatten(header), "body": flatten(body)}, indent=2) + "\n"


def render(header: dict, body: dict, fmt: str = "text") -> str:
    if fmt == "json":
        return render_json(header, body)
    if fmt == "text":
        return render_text(header, body)
    raise ValueError(f"unknown format {fmt!r}")


def parse_text(text: str) -> tuple[dict, dict]:
    """Inverse of ``render_text`` for scalar values (lists come back as JSON strings)."""
    header, body = {}, {}
    target = header
    for line in text.splitlines():
        if line == HEADER_DELIMITER:
            target = body
            continue
        if target is header:
            line = line[2:]
        key, _, raw = line.partition(" = ")
        target[key] = _parse_scalar(raw)
    return header, body


def _parse_scalar(raw: str):
    if raw in ("true", "false"):
        return raw == "true"
    if raw == "null":
        return None
    for conv in (int, float):
        try:
            return conv(raw)
        except ValueError:
            pass
    if raw[:1] in "[{":
        return json.loads(raw)
    return raw


def strip_header(text: str) -> str:
    """The part of a text or JSON report that must be identical across runs."""
    if text.lstrip().startswith("{"):
        return json.dumps(json.loads(text)["body"], indent=2)
    _, _, body = text.partition(HEADER_DELIMITER + "\n")
    return body
