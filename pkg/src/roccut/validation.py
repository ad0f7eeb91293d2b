"""Input validation helpers used by estimators and numeric routines."""

import numpy as np

from .exceptions import DegenerateSampleError, InvalidArgumentError


def as_1d_float(values, name="values"):
    """Coerce to a 1-D float64 array, rejecting non-finite entries."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise InvalidArgumentError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    return arr


def check_positive_scalar(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise InvalidArgumentError(f"{name} must be a positive finite number, got {value!r}")
    return value


def check_probability(p, name="p", open_interval=True):
    arr = np.asarray(p, dtype=float)
    if open_interval:
        bad = ~((arr > 0) & (arr < 1))
    else:
        bad = ~((arr >= 0) & (arr <= 1))
    if np.any(bad):
        raise InvalidArgumentError(f"{name} must lie in (0,1), got {np.asarray(p)[bad][:3]!r}")
    return arr if arr.ndim else float(arr)


def check_min_size(arr, n_min, name="sample"):
    if arr.size < n_min:
        raise InvalidArgumentError(f"{name} needs at least {n_min} observations, got {arr.size}")
    return arr


def check_not_degenerate(arr, name="sample"):
    if arr.size and np.min(arr) == np.max(arr):
        raise DegenerateSampleError(f"{name} has zero spread (all values equal to {arr[0]!r})")
    return arr


def check_binary_labels(labels, name="group"):
    """Validate a 0/1 group-label vector; returns an int array."""
    arr = np.asarray(labels)
    vals = np.unique(arr)
    bad = [v for v in vals.tolist() if v not in (0, 1, 0.0, 1.0, False, True)]
    if bad:
        idx = int(np.nonzero(~np.isin(arr, (0, 1)))[0][0])
        raise InvalidArgumentError(
            f"{name} column must be coded 0/1; found {bad[0]!r} at row {idx}"
        )
    return arr.astype(int)
