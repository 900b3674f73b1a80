"""Canonical report serialization.

Reports are plain dicts; the canonical byte form sorts keys, strips spaces and
replaces non-finite floats with null, so identical runs produce identical
files.  Wall-clock timings never enter the canonical form.
"""

from __future__ import annotations

import json
import math
from typing import Iterable

import numpy as np


def sanitize(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def canonical_json(report: dict) -> str:
    return json.dumps(sanitize(report), sort_keys=True, separators=(",", ":"))


def radius_csv(n: int, rows: Iterable[dict]) -> str:
    header = ",".join([f"x{i+1}" for i in range(n)] + ["R0", "R1"])
    lines = [header]
    for row in rows:
        vals = [repr(float(v)) for v in row["x"]] + [repr(float(row["R0"])), repr(float(row["R1"]))]
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"
