"""Small helpers: canonical JSON, config hashing and human-readable formatting."""

import hashlib
import json
from typing import Any

import numpy as np


def _default(value: Any):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if hasattr(value, '__dict__'):
        return vars(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def canonical_json(obj: Any) -> str:
    """JSON with sorted keys and no whitespace; floats use repr so equal configs hash equally."""
    return json.dumps(obj, sort_keys=True, separators=(',', ':'), default=_default)


def config_hash(obj: Any) -> str:
    """First 12 hex characters of the SHA-256 of the canonical JSON."""
    return hashlib.sha256(canonical_json(obj).encode('utf-8')).hexdigest()[:12]


def format_seconds(seconds):
    """Convert seconds to a short human readable duration."""
    try:
        seconds = float(seconds)
        if seconds < 0:
            return "Unknown duration"
        if seconds < 60:
            return f"{seconds:.1f}s"
        minutes, secs = divmod(seconds, 60)
        if minutes < 60:
            return f"{int(minutes)}m {secs:.0f}s"
        hours, minutes = divmod(minutes, 60)
        return f"{int(hours)}h {int(minutes)}m"
    except (ValueError, TypeError):
        return "Unknown duration"


def format_value(value: float) -> str:
    """Fixed 12-significant-digit formatting used in CSV and console output."""
    return f"{float(value):.12g}"
