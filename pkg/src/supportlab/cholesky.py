"""Dense and column-oriented sparse Cholesky factorization.

The sparse factorization keeps the already-computed columns of ``L`` twice: by
column (with a cursor per column) and by row, so that step ``j`` can find the
columns ``k`` with ``L_jk != 0`` and stream the tail ``L_{j:n,k}`` of each into
a sparse accumulator.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .sparse import Permutation, SymSparseMatrix, permute_sym

RANK_TOL = 1e-12


class FactorizationError(ValueError):
    pass


class NotPositiveDefiniteError(FactorizationError):
    def __init__(self, column: int, pivot: float):
        super().__init__(f"matrix is not positive definite: pivot {pivot:g} at column {column}")
        self.column = column
        self.pivot = pivot


class SemidefiniteRankError(NotPositiveDefiniteError):
    """Pivot too close to zero to decide definiteness."""


def dense_cholesky(A) -> np.ndarray:
    """Right-looking dense Cholesky: peel off the first row and column, recurse on the Schur complement."""
    S = np.array(A, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.array_equal(S, S.T):
        raise ValueError("matrix is not symmetric")
    n = S.shape[0]
    L = np.zeros_like(S)
    for j in range(n):
        if not S[j, j] > 0:
            raise NotPositiveDefiniteError(j, float(S[j, j]))
        ljj = np.sqrt(S[j, j])
        L[j, j] = ljj
        L[j + 1:, j] = S[j + 1:, j] / ljj
        S[j + 1:, j + 1:] -= np.outer(L[j + 1:, j], L[j + 1:, j])
    return L


class SparseAccumulator:
    """Dense scratch for one column: ``values``, the touched ``rowind``, and ``exists`` flags."""

    __slots__ = ("values", "rowind", "exists", "nnz")

    def __init__(self, n: int):
        self.values = np.zeros(n)
        self.rowind = np.zeros(n, dtype=np.int64)
        self.exists = np.zeros(n, dtype=bool)
        self.nnz = 0

    def scatter_add(self, rows: np.ndarray, vals: np.ndarray) -> None:
        """``values[rows] += vals`` for distinct ``rows``, registering new indices."""
        fresh = rows[~self.exists[rows]]
        if len(fresh):
            self.exists[fresh] = True
            self.values[fresh] = 0.0
            self.rowind[self.nnz:self.nnz + len(fresh)] = fresh
            self.nnz += len(fresh)
        self.values[rows] += vals

    def flush(self) -> tuple[np.ndarray, np.ndarray]:
        """Return the live ``(rows, values)`` sorted by row and reset the flags."""
        rows = np.sort(self.rowind[:self.nnz])
        vals = self.values[rows].copy()
        self.exists[rows] = False
        self.nnz = 0
        return rows, vals


@dataclass
class ColumnWorkspace:
    n: int
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    cursors: list = field(default_factory=list)

    def __post_init__(self):
        self.columns = [None] * self.n
        self.rows = [deque() for _ in range(self.n)]
        self.cursors = [0] * self.n


class CholFactor:
    """Lower-triangular factor stored by columns (diagonal first in each column).

    ``flops`` counts square roots, divisions, and multiply-subtract pairs;
    ``fill`` is the number of stored entries of ``L``.
    """

    __slots__ = ("n", "indptr", "rows", "vals", "flops", "_cols")

    def __init__(self, n, indptr, rows, vals, flops):
        self.n = int(n)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.rows = np.asarray(rows, dtype=np.int64)
        self.vals = np.asarray(vals, dtype=np.float64)
        for a in (self.indptr, self.rows, self.vals):
            a.setflags(write=False)
        self.flops = int(flops)
        self._cols = None

    @property
    def fill(self) -> int:
        return int(self.indptr[-1])

    def column(self, j: int):
        a, b = self.indptr[j], self.indptr[j + 1]
        return self.rows[a:b], self.vals[a:b]

    def column_counts(self) -> np.ndarray:
        """Off-diagonal entry count of each column."""
        return np.diff(self.indptr) - 1

    def closed_form_flops(self) -> int:
        eta = self.column_counts()
        return int(np.sum(1 + eta + eta * (eta + 1) // 2))

    def structure(self) -> list[list[int]]:
        return [self.column(j)[0].tolist() for j in range(self.n)]

    def to_dense(self) -> np.ndarray:
        L = np.zeros((self.n, self.n))
        for j in range(self.n):
            r, v = self.column(j)
            L[r, j] = v
        return L

    def _columns(self):
        if self._cols is None:
            self._cols = [
                (float(v[0]), r[1:], v[1:]) for r, v in (self.column(j) for j in range(self.n))
            ]
        return self._cols

    def forward_solve(self, b) -> np.ndarray:
        """Solve ``L y = b``."""
        y = np.array(b, dtype=np.float64)
        if y.shape != (self.n,):
            raise ValueError("right-hand side length does not match factor order")
        for j, (d, r, v) in enumerate(self._columns()):
            if d == 0.0:
                raise ZeroDivisionError(f"zero diagonal in factor column {j}")
            y[j] /= d
            if len(r):
                y[r] -= v * y[j]
        return y

    def backward_solve(self, y) -> np.ndarray:
        """Solve ``L^T x = y``."""
        x = np.array(y, dtype=np.float64)
        if x.shape != (self.n,):
            raise ValueError("right-hand side length does not match factor order")
        cols = self._columns()
        for j in range(self.n - 1, -1, -1):
            d, r, v = cols[j]
            if d == 0.0:
                raise ZeroDivisionError(f"zero diagonal in factor column {j}")
            if len(r):
                x[j] -= v @ x[r]
            x[j] /= d
        return x

    def solve(self, b) -> np.ndarray:
        return self.backward_solve(self.forward_solve(b))

    def __repr__(self) -> str:
        return f"CholFactor(n={self.n}, fill={self.fill}, flops={self.flops})"


def factor_with_workspace(A: SymSparseMatrix) -> tuple[CholFactor, ColumnWorkspace, SparseAccumulator]:
    """Sparse Cholesky that also returns its scratch structures for inspection."""
    n = A.n
    ws = ColumnWorkspace(n)
    spa = SparseAccumulator(n)
    diag = A.diagonal()
    tol = RANK_TOL * (float(np.max(np.abs(diag))) if n else 0.0)
    flops = 0
    out_rows, out_vals, counts = [], [], np.zeros(n + 1, dtype=np.int64)

    for j in range(n):
        ar, av = A.column(j)
        if len(ar):
            spa.scatter_add(ar, av)
        for k, ljk in ws.rows[j]:
            kr, kv = ws.columns[k]
            c = ws.cursors[k]
            seg_r, seg_v = kr[c:], kv[c:]
            spa.scatter_add(seg_r, -ljk * seg_v)
            flops += len(seg_r)
            if seg_r[0] == j:
                ws.cursors[k] = c + 1

        pivot = float(spa.values[j]) if spa.exists[j] else 0.0
        if abs(pivot) <= tol:
            spa.flush()
            raise SemidefiniteRankError(j, pivot)
        if pivot < 0:
            spa.flush()
            raise NotPositiveDefiniteError(j, pivot)

        rows, vals = spa.flush()
        keep = (rows > j) & (vals != 0.0)
        rows, vals = rows[keep], vals[keep]
        ljj = np.sqrt(pivot)
        vals = vals / ljj
        flops += 1 + len(rows)

        col_r = np.concatenate(([j], rows))
        col_v = np.concatenate(([ljj], vals))
        ws.columns[j] = (col_r, col_v)
        ws.cursors[j] = 1
        for i, lij in zip(rows.tolist(), vals.tolist()):
            ws.rows[i].appendleft((j, lij))
        out_rows.append(col_r)
        out_vals.append(col_v)
        counts[j + 1] = len(col_r)

    indptr = np.cumsum(counts)
    F = CholFactor(
        n,
        indptr,
        np.concatenate(out_rows) if n else np.zeros(0, dtype=np.int64),
        np.concatenate(out_vals) if n else np.zeros(0),
        flops,
    )
    return F, ws, spa


def sparse_cholesky(A: SymSparseMatrix) -> CholFactor:
    return factor_with_workspace(A)[0]


def solve_direct(A: SymSparseMatrix, b, order: Permutation | None = None) -> tuple[np.ndarray, CholFactor]:
    """Factor ``P A P^T``, solve with ``P b``, and return ``x`` in the original numbering."""
    if order is None:
        order = Permutation.identity(A.n)
    F = sparse_cholesky(permute_sym(A, order))
    y = F.solve(order.apply(np.asarray(b, dtype=np.float64)))
    return order.unapply(y), F
