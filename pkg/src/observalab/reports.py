"""Deterministic artifact writers.

CSV files carry a fixed column order and 17-significant-digit floats; JSON
files are indented with sorted keys.  Both start life with a generation
timestamp -- the one line excluded when comparing runs for reproducibility
(see strip_timestamp).
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

__all__ = ["format_cell", "write_csv", "write_json", "strip_timestamp"]


def _stamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def format_cell(value) -> str:
    """One CSV cell: %.17g floats, re+imj complex, true/false, raw strings."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    if isinstance(value, (complex, np.complexfloating)):
        return "%.17g%+.17gj" % (value.real, value.imag)
    text = str(value)
    if any(ch in text for ch in ",\n\r"):
        raise ValueError(f"CSV cell may not contain separators: {text!r}")
    return text


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    """Rows are dicts; cells are emitted in the fixed header order."""
    path = Path(path)
    lines = [f"# generated_at: {_stamp()}", ",".join(header)]
    for row in rows:
        lines.append(",".join(format_cell(row.get(col)) for col in header))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _json_ready(value):
    if isinstance(value, dict):
        return {str(k): _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_json_ready(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    return value


def write_json(path: str | Path, payload: dict) -> Path:
    """Complex numbers become [re, im] pairs; numpy scalars plain numbers."""
    path = Path(path)
    body = dict(payload)
    body["generated_at"] = _stamp()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_json_ready(body), indent=2, sort_keys=True)
                    + "\n", encoding="utf-8")
    return path


def strip_timestamp(text: str) -> str:
    """Drop the generation-stamp line so reruns can be compared byte-wise."""
    kept = [line for line in text.splitlines() if "generated_at" not in line]
    return "\n".join(kept) + "\n"
