"""
Run Identity
============
Canonical JSON form of configurations and reports, and the sha256 hash
that identifies a run.

Normalization sorts mapping keys, turns tuples and arrays into lists,
numpy scalars into Python numbers, and non-finite floats into null, so
the same configuration always hashes the same way.
"""

from __future__ import annotations

import hashlib
import json
import math
from datetime import date, datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict

import numpy as np


def normalize_for_json(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): normalize_for_json(v) for k, v in sorted(value.items(), key=lambda x: str(x[0]))}
    if isinstance(value, (list, tuple)):
        return [normalize_for_json(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return [normalize_for_json(v) for v in sorted(value, key=lambda x: str(x))]
    if isinstance(value, np.ndarray):
        return [normalize_for_json(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (datetime, date)):
        return value.isoformat()
    if isinstance(value, Path):
        return str(value)
    return value


def canonical_json(data: Any, indent: Any = None) -> str:
    """Sorted keys, ASCII, NaN/inf as null; compact unless indent is given."""
    separators = (",", ":") if indent is None else (",", ": ")
    return json.dumps(
        normalize_for_json(data),
        sort_keys=True,
        separators=separators,
        ensure_ascii=True,
        allow_nan=False,
        indent=indent,
        default=str,
    )


def build_config_hash(config: Dict[str, Any]) -> str:
    payload = canonical_json(config).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()
