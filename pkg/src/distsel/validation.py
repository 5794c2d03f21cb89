"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np


class InputError(ValueError):
    """Raised when user-supplied data violates a documented precondition."""


def as_float_array(values, name: str = "values") -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))
        raise InputError(f"{name} contains non-finite entries, first at index {tuple(bad[0])}")
    return arr


def check_sample(x, min_size: int = 1, name: str = "sample") -> np.ndarray:
    """Validate a 1-D numeric sample and return it as a float array."""
    arr = as_float_array(x, name)
    if arr.ndim != 1:
        raise InputError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size < min_size:
        raise InputError(f"{name} needs at least {min_size} values, got {arr.size}")
    return arr


def check_matrix(values, name: str = "matrix") -> np.ndarray:
    arr = as_float_array(values, name)
    if arr.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


def check_square_distances(values, tol: float = 1e-12, name: str = "distance matrix") -> np.ndarray:
    """Validate symmetry, zero diagonal and nonnegativity of a distance matrix."""
    arr = check_matrix(values, name)
    n, m = arr.shape
    if n != m:
        raise InputError(f"{name} must be square, got {n}x{m}")
    asym = float(np.max(np.abs(arr - arr.T))) if n else 0.0
    if asym > tol:
        raise InputError(f"{name} is asymmetric, max |D_ij - D_ji| = {asym:.3g}")
    diag = float(np.max(np.abs(np.diag(arr)))) if n else 0.0
    if diag > tol:
        raise InputError(f"{name} has nonzero diagonal entries up to {diag:.3g}")
    if np.any(arr < 0):
        raise InputError(f"{name} has negative entries")
    return arr


def check_labels(labels, n: int | None = None) -> np.ndarray:
    """Validate a label vector: positive integers 1..k, each occurring at least once."""
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise InputError(f"labels must be 1-D, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        flo = np.asarray(labels, dtype=float)
        if not np.all(flo == np.round(flo)):
            raise InputError("labels must be integers")
        arr = flo.astype(int)
    arr = arr.astype(int)
    if n is not None and arr.size != n:
        raise InputError(f"labels length {arr.size} does not match n = {n}")
    uniq = np.unique(arr)
    if uniq.size == 0 or uniq[0] < 1 or uniq[-1] != uniq.size:
        raise InputError(f"labels must cover 1..k with every label present, got values {uniq}")
    return arr


def normalize_labels(raw) -> np.ndarray:
    """Map arbitrary integer labels onto 1..k, ordered by sorted original value."""
    arr = np.asarray(raw)
    if arr.ndim != 1:
        raise InputError(f"labels must be 1-D, got shape {arr.shape}")
    uniq, inverse = np.unique(arr, return_inverse=True)
    if uniq.size == 0:
        raise InputError("empty label vector")
    return (inverse + 1).astype(int)
