"""Input validation helpers used by the estimators and module functions."""

from __future__ import annotations

import numpy as np
from sklearn.exceptions import NotFittedError

from .exceptions import DataError


def as_float_vector(x, name: str = "x", min_len: int = 1, require_finite: bool = True) -> np.ndarray:
    """Coerce to a 1-D float64 array, checking length and finiteness."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DataError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.shape[0] < min_len:
        raise DataError(f"{name} must have at least {min_len} entries, got {arr.shape[0]}")
    if require_finite and not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr


def as_float_matrix(x, name: str = "X", require_finite: bool = True) -> np.ndarray:
    """Coerce to a 2-D float64 array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise DataError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if require_finite and not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr


def check_equal_length(a: np.ndarray, b: np.ndarray, names: str = "inputs") -> None:
    if a.shape[0] != b.shape[0]:
        raise DataError(f"{names} must have equal length: {a.shape[0]} vs {b.shape[0]}")


def check_fitted(estimator, attribute: str) -> None:
    """Raise NotFittedError when `attribute` has not been set by fit()."""
    if getattr(estimator, attribute, None) is None:
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted; call fit() before using this method"
        )
