"""Input coercion shared by the estimator layer and the command line."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .sparse import SymSparseMatrix


def check_sym_sparse(A, *, name: str = "A") -> SymSparseMatrix:
    """Return ``A`` as a :class:`SymSparseMatrix`, accepting dense arrays and scipy matrices."""
    if isinstance(A, SymSparseMatrix):
        return A
    if sp.issparse(A):
        return SymSparseMatrix.from_scipy(A)
    arr = np.asarray(A, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return SymSparseMatrix.from_dense(arr)


def check_vector(x, n: int | None = None, *, name: str = "b") -> np.ndarray:
    """Return ``x`` as a finite 1-D float array, optionally of length ``n``."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr
