"""Deterministic CSV and JSON writers."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

__all__ = ["MANIFEST_NAME", "format_value", "write_csv", "write_json", "to_jsonable"]

MANIFEST_NAME = "manifest.json"


def format_value(x):
    """Shortest round-trip text for numbers; other values via ``str``."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        return repr(x)
    return str(x)


def write_csv(path, header, rows, config_hash):
    """Write a CSV whose first line references the run manifest."""
    buf = io.StringIO()
    buf.write(f"# manifest={MANIFEST_NAME} config_hash={config_hash}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format_value(v) for v in r])
    Path(path).write_text(buf.getvalue())
    return Path(path)


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def write_json(path, obj):
    Path(path).write_text(json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n")
    return Path(path)
