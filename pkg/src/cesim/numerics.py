"""Dense vector helpers and the finite-difference gradient oracle.

Model vectors are plain 1-d float64 numpy arrays; matrices are 2-d arrays
with rows as data points. Problem sizes are tiny (d, l <= ~100), so nothing
here tries to be clever.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import ConfigurationError


def as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ConfigurationError(f"expected a 1-d vector, got shape {v.shape}")
    return v


def dot(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise ConfigurationError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.dot(a, b))


def norm2(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def finite_diff_gradient(fn: Callable[[np.ndarray], float], x: np.ndarray, h: float) -> np.ndarray:
    """Central-difference gradient estimate, component by component."""
    if h <= 0:
        raise ConfigurationError("finite difference step h must be > 0")
    x = as_vector(x)
    grad = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        grad[i] = (fn(x + e) - fn(x - e)) / (2.0 * h)
    return grad
