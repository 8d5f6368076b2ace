"""CSV and JSON writers with a fixed byte format.

Floats are written with ``repr`` (shortest round-trip form, ``.`` decimal),
lines end in LF, and JSON keys are sorted, so equal results give equal
bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys

import numpy as np

__all__ = ["to_plain", "csv_text", "json_text", "write_text"]


def to_plain(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer, np.bool_)):
        return str(v.item())
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(to_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_text(text: str, path=None):
    """Write to ``path`` (LF preserved) or to stdout when path is None or '-'."""
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
