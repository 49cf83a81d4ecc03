"""Small input-validation helpers shared by the estimators and kernels."""

import numbers

import numpy as np


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not value > 0 or not np.isfinite(value):
        raise ValueError(f"{name} must be a finite positive real, got {value!r}")
    return float(value)


def check_unit_vector(d, tol=1e-12, name="direction"):
    d = np.asarray(d, dtype=float).reshape(-1)
    if d.shape != (2,):
        raise ValueError(f"{name} must be a 2-vector, got shape {d.shape}")
    if abs(np.hypot(d[0], d[1]) - 1.0) > tol:
        raise ValueError(f"{name} must have unit length (|d| = {np.hypot(*d):.16g})")
    return d


def check_points(x, name="points"):
    """Coerce to an (m, 2) float array; a single point becomes (1, 2)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError(f"{name} must have shape (m, 2), got {x.shape}")
    return x


def unit(angle):
    return np.array([np.cos(angle), np.sin(angle)])
