"""Symmetric sparse matrices stored by lower-triangle columns.

Indices are 0-based everywhere in the library; Matrix Market files and the
command line are the only places that see 1-based indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class InvalidSpecError(ValueError):
    pass


class MatrixMarketError(ValueError):
    pass


def _frozen(a) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class SymSparseMatrix:
    """Symmetric matrix holding only its lower triangle, column by column.

    Column ``j`` is the pair ``(rows[indptr[j]:indptr[j+1]], vals[...])`` with
    strictly increasing row indices ``>= j``. Entry ``(i, j)`` with ``i > j``
    also stands for ``(j, i)``.
    """

    __slots__ = ("n", "indptr", "rows", "vals", "_full")

    def __init__(self, n: int, indptr, rows, vals, *, check: bool = True):
        self.n = int(n)
        self.indptr = _frozen(np.asarray(indptr, dtype=np.int64))
        self.rows = _frozen(np.asarray(rows, dtype=np.int64))
        self.vals = _frozen(np.asarray(vals, dtype=np.float64))
        self._full = None
        if check:
            self._check()

    def _check(self) -> None:
        n = self.n
        if self.indptr.shape != (n + 1,) or self.indptr[0] != 0:
            raise ValueError("indptr must have length n+1 and start at 0")
        if self.indptr[-1] != len(self.rows) or len(self.rows) != len(self.vals):
            raise ValueError("rows/vals length does not match indptr")
        if np.any(np.diff(self.indptr) < 0):
            raise ValueError("indptr must be nondecreasing")
        if not np.all(np.isfinite(self.vals)):
            raise ValueError("matrix values must be finite")
        if np.any(self.vals == 0.0):
            raise ValueError("explicit zeros are not stored")
        for j in range(n):
            r = self.rows[self.indptr[j]:self.indptr[j + 1]]
            if len(r) and (r[0] < j or r[-1] >= n or np.any(np.diff(r) <= 0)):
                raise ValueError(f"column {j}: row indices must be strictly increasing in [{j}, {n})")

    # construction -------------------------------------------------------

    @classmethod
    def from_entries(cls, n: int, entries: Iterable[tuple[int, int, float]]) -> "SymSparseMatrix":
        """Build from ``(i, j, value)`` triples; either triangle accepted, duplicates summed."""
        acc: dict[tuple[int, int], float] = {}
        for i, j, v in entries:
            i, j = int(i), int(j)
            if not (0 <= i < n and 0 <= j < n):
                raise IndexError(f"entry ({i}, {j}) out of range for order {n}")
            if i < j:
                i, j = j, i
            acc[(i, j)] = acc.get((i, j), 0.0) + float(v)
        keys = sorted((j, i) for (i, j), v in acc.items() if v != 0.0)
        indptr = np.zeros(n + 1, dtype=np.int64)
        rows = np.empty(len(keys), dtype=np.int64)
        vals = np.empty(len(keys), dtype=np.float64)
        for k, (j, i) in enumerate(keys):
            indptr[j + 1] += 1
            rows[k] = i
            vals[k] = acc[(i, j)]
        np.cumsum(indptr, out=indptr)
        return cls(n, indptr, rows, vals)

    @classmethod
    def from_dense(cls, D) -> "SymSparseMatrix":
        D = np.asarray(D, dtype=np.float64)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise ValueError("expected a square matrix")
        if not np.array_equal(D, D.T):
            raise ValueError("matrix is not symmetric")
        n = D.shape[0]
        ii, jj = np.nonzero(np.tril(D))
        return cls.from_entries(n, zip(ii, jj, D[ii, jj]))

    @classmethod
    def from_scipy(cls, M) -> "SymSparseMatrix":
        M = sp.coo_matrix(M)
        if M.shape[0] != M.shape[1]:
            raise ValueError("expected a square matrix")
        low = sp.tril(M).tocoo()
        up = sp.triu(M).tocoo()
        if (abs(low - up.T) > 0).nnz:
            raise ValueError("matrix is not symmetric")
        return cls.from_entries(M.shape[0], zip(low.row, low.col, low.data))

    # access ---------------------------------------------------------------

    def column(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        a, b = self.indptr[j], self.indptr[j + 1]
        return self.rows[a:b], self.vals[a:b]

    @property
    def nnz_lower(self) -> int:
        return int(self.indptr[-1])

    @property
    def nnz(self) -> int:
        """Nonzeros of the full symmetric matrix."""
        return 2 * self.nnz_lower - int(np.count_nonzero(self.diagonal()))

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.n)
        for j in range(self.n):
            r, v = self.column(j)
            if len(r) and r[0] == j:
                d[j] = v[0]
        return d

    def entries(self):
        """Yield lower-triangle ``(i, j, value)`` triples in column order."""
        for j in range(self.n):
            r, v = self.column(j)
            for i, x in zip(r.tolist(), v.tolist()):
                yield i, j, x

    def get(self, i: int, j: int) -> float:
        if i < j:
            i, j = j, i
        r, v = self.column(j)
        k = np.searchsorted(r, i)
        return float(v[k]) if k < len(r) and r[k] == i else 0.0

    def to_scipy(self) -> sp.csr_matrix:
        """Full symmetric CSR copy (cached)."""
        if self._full is None:
            cols = np.repeat(np.arange(self.n), np.diff(self.indptr))
            low = sp.coo_matrix((self.vals, (self.rows, cols)), shape=(self.n, self.n))
            strict = sp.coo_matrix(
                (self.vals[self.rows != cols], (self.rows[self.rows != cols], cols[self.rows != cols])),
                shape=(self.n, self.n),
            )
            self._full = (low + strict.T).tocsr()
        return self._full

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymSparseMatrix):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.vals, other.vals)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"SymSparseMatrix(n={self.n}, nnz_lower={self.nnz_lower})"


@dataclass(frozen=True)
class MeshSpec:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) not in (2, 3):
            raise InvalidSpecError("a mesh has 2 or 3 extents")
        if any(d < 1 for d in dims):
            raise InvalidSpecError(f"mesh extents must be >= 1, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n(self) -> int:
        return int(np.prod(self.dims))

    def index(self, *coords: int) -> int:
        """Vertex number with x varying fastest, then y, then z."""
        idx, stride = 0, 1
        for c, d in zip(coords, self.dims):
            idx += c * stride
            stride *= d
        return idx

    def coords(self, v: int) -> tuple[int, ...]:
        out = []
        for d in self.dims:
            out.append(v % d)
            v //= d
        return tuple(out)

    def edges(self):
        """Grid edges ``(u, v)`` with ``u < v``, grouped by axis (axis, u, v)."""
        dims = self.dims
        for axis in range(len(dims)):
            for v in range(self.n):
                c = self.coords(v)
                if c[axis] + 1 < dims[axis]:
                    c2 = list(c)
                    c2[axis] += 1
                    yield axis, v, self.index(*c2)

    @classmethod
    def parse(cls, text: str) -> "MeshSpec":
        try:
            return cls(tuple(int(t) for t in text.replace("x", ",").split(",")))
        except ValueError as exc:
            raise InvalidSpecError(f"cannot parse mesh spec {text!r}") from exc


def mesh_laplacian(spec) -> SymSparseMatrix:
    """Model matrix of a 2D/3D mesh: -1 on grid edges, row 0 sums to 1, others to 0."""
    if not isinstance(spec, MeshSpec):
        spec = MeshSpec(tuple(spec))
    n = spec.n
    deg = np.zeros(n)
    entries = []
    for _, u, v in spec.edges():
        entries.append((v, u, -1.0))
        deg[u] += 1
        deg[v] += 1
    deg[0] += 1
    entries.extend((i, i, deg[i]) for i in range(n))
    return SymSparseMatrix.from_entries(n, entries)


def arrow_matrix(n: int) -> SymSparseMatrix:
    """Arrow matrix: ``n+1`` in the corner, -1 along the first row/column, ones below."""
    entries = [(0, 0, n + 1.0)]
    for i in range(1, n):
        entries.append((i, 0, -1.0))
        entries.append((i, i, 1.0))
    return SymSparseMatrix.from_entries(n, entries)


class Permutation:
    """Symmetric reordering: ``perm[new] = old`` and ``inv[old] = new``."""

    __slots__ = ("perm", "inv")

    def __init__(self, perm: Sequence[int]):
        p = np.asarray(perm, dtype=np.int64)
        n = len(p)
        inv = np.full(n, -1, dtype=np.int64)
        if n and (p.min() < 0 or p.max() >= n):
            raise ValueError("permutation entries out of range")
        inv[p] = np.arange(n)
        if np.any(inv < 0):
            raise ValueError("not a permutation: repeated entries")
        self.perm = _frozen(p)
        self.inv = _frozen(inv)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))

    @classmethod
    def reversal(cls, n: int) -> "Permutation":
        return cls(np.arange(n)[::-1])

    def inverse(self) -> "Permutation":
        return Permutation(self.inv)

    def __len__(self) -> int:
        return len(self.perm)

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and np.array_equal(self.perm, other.perm)

    __hash__ = None

    def __repr__(self) -> str:
        return f"Permutation(n={len(self)})"

    def apply(self, x) -> np.ndarray:
        """``P x``: entry ``old`` moves to position ``inv[old]``."""
        return np.asarray(x)[self.perm]

    def unapply(self, y) -> np.ndarray:
        """``P^T y``."""
        return np.asarray(y)[self.inv]


def permute_sym(A: SymSparseMatrix, P: Permutation) -> SymSparseMatrix:
    """Form ``P A P^T``: entry ``(i, j)`` lands at ``(inv[i], inv[j])``."""
    if len(P) != A.n:
        raise ValueError(f"permutation of order {len(P)} does not match matrix order {A.n}")
    inv = P.inv
    cols = np.repeat(np.arange(A.n), np.diff(A.indptr))
    ni, nj = inv[A.rows], inv[cols]
    lo, hi = np.minimum(ni, nj), np.maximum(ni, nj)
    order = np.lexsort((hi, lo))
    indptr = np.zeros(A.n + 1, dtype=np.int64)
    np.add.at(indptr, lo + 1, 1)
    return SymSparseMatrix(A.n, np.cumsum(indptr), hi[order], A.vals[order], check=False)


def matvec(A: SymSparseMatrix, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.n,):
        raise ValueError(f"vector of shape {x.shape} does not match matrix order {A.n}")
    return A.to_scipy() @ x


# Matrix Market ------------------------------------------------------------

_MM_HEADER = "%%MatrixMarket matrix coordinate real symmetric"


def read_matrix_market(text: str) -> SymSparseMatrix:
    lines = text.splitlines()
    if not lines:
        raise MatrixMarketError("empty input")
    head = lines[0].split()
    if len(head) != 5 or head[0] != "%%MatrixMarket":
        raise MatrixMarketError(f"malformed header: {lines[0]!r}")
    if [h.lower() for h in head[1:]] != ["matrix", "coordinate", "real", "symmetric"]:
        raise MatrixMarketError(f"unsupported format: {' '.join(head[1:])}")
    body = (ln.strip() for ln in lines[1:])
    body = [ln for ln in body if ln and not ln.startswith("%")]
    if not body:
        raise MatrixMarketError("missing size line")
    try:
        nr, nc, nz = (int(t) for t in body[0].split())
    except ValueError as exc:
        raise MatrixMarketError(f"malformed size line: {body[0]!r}") from exc
    if nr != nc:
        raise MatrixMarketError("symmetric matrix must be square")
    if len(body) - 1 != nz:
        raise MatrixMarketError(f"expected {nz} entries, found {len(body) - 1}")
    entries = []
    for ln in body[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise MatrixMarketError(f"malformed entry line: {ln!r}")
        i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        if not (1 <= i <= nr and 1 <= j <= nc):
            raise MatrixMarketError(f"index ({i}, {j}) out of range")
        if i < j:
            raise MatrixMarketError(f"upper-triangle entry ({i}, {j}) in symmetric file")
        entries.append((i - 1, j - 1, v))
    return SymSparseMatrix.from_entries(nr, entries)


def _fmt(v: float) -> str:
    return repr(float(v)) if v != int(v) else str(int(v))


def write_matrix_market(A: SymSparseMatrix) -> str:
    out = [_MM_HEADER, f"{A.n} {A.n} {A.nnz_lower}"]
    out.extend(f"{i + 1} {j + 1} {_fmt(v)}" for i, j, v in A.entries())
    return "\n".join(out) + "\n"
