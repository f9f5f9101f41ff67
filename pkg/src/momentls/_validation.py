"""Small input-validation helpers shared across the package."""

from __future__ import annotations

import numpy as np

__all__ = ["as_float_array", "as_samples", "check_positive_int"]


def as_float_array(values, name="values"):
    """Coerce to a 1-D float64 array, rejecting non-finite entries."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_samples(values, name="samples", min_length=2):
    """Validate a chain sample array: 1-D, finite, at least ``min_length`` long."""
    arr = as_float_array(values, name)
    if arr.size < min_length:
        raise ValueError(f"{name} must contain at least {min_length} values, got {arr.size}")
    return arr


def check_positive_int(value, name):
    if not float(value).is_integer() or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)
