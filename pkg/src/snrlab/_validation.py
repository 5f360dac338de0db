"""Input validation helpers shared by the estimators and the harness."""

from __future__ import annotations

import numpy as np

__all__ = ["as_design_matrix", "as_response", "check_positive", "check_count"]


def as_design_matrix(X) -> np.ndarray:
    """Coerce ``X`` to a 2-d float64 array with finite entries."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"design matrix must be 2-d, got shape {X.shape}")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"design matrix must be at least 1x1, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("design matrix contains non-finite entries")
    return X


def as_response(y, n: int) -> np.ndarray:
    """Coerce ``y`` to a length-``n`` float64 vector with finite entries."""
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] != n:
        raise ValueError(f"response has length {y.shape[0]}, expected {n}")
    if not np.all(np.isfinite(y)):
        raise ValueError("response contains non-finite entries")
    return y


def check_positive(name: str, value) -> float:
    value = float(value)
    if not value > 0 or not np.isfinite(value):
        raise ValueError(f"{name} must be a positive finite real, got {value}")
    return value


def check_count(name: str, value, minimum: int = 1) -> int:
    ivalue = int(value)
    if ivalue != value or ivalue < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value}")
    return ivalue
