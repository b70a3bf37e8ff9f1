"""Diagonally dominant matrices viewed as weighted graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .sparse import SymSparseMatrix


class NotDiagonallyDominantError(ValueError):
    def __init__(self, row: int, margin: float):
        super().__init__(f"matrix is not diagonally dominant: row {row} has margin {margin:g}")
        self.row = row
        self.margin = margin


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph with signed edge weights ``c`` and vertex weights ``d``.

    ``edges`` holds ``(i, j, c)`` with ``i < j`` and ``c != 0``, sorted by ``(i, j)``.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]
    d: tuple[float, ...]

    def __init__(self, n: int, edges, d: Sequence[float] | None = None):
        n = int(n)
        seen = {}
        for i, j, c in edges:
            i, j, c = int(i), int(j), float(c)
            if i == j:
                raise ValueError(f"self loop at vertex {i}")
            if i > j:
                i, j = j, i
            if not (0 <= i and j < n):
                raise IndexError(f"edge ({i}, {j}) out of range for {n} vertices")
            if c == 0.0:
                raise ValueError(f"edge ({i}, {j}) has zero weight")
            if (i, j) in seen:
                raise ValueError(f"parallel edge ({i}, {j})")
            seen[(i, j)] = c
        d = tuple(float(x) for x in (d if d is not None else [0.0] * n))
        if len(d) != n:
            raise ValueError("vertex weight vector has the wrong length")
        if any(x < 0 for x in d):
            raise ValueError("vertex weights must be nonnegative")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple((i, j, c) for (i, j), c in sorted(seen.items())))
        object.__setattr__(self, "d", d)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def is_unsigned(self) -> bool:
        return all(c > 0 for _, _, c in self.edges)

    def edge_dict(self) -> dict[tuple[int, int], float]:
        return {(i, j): c for i, j, c in self.edges}

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j, _ in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        for a in adj:
            a.sort()
        return adj

    def with_vertex_weights(self, d) -> "WeightedGraph":
        return WeightedGraph(self.n, self.edges, d)


DD_TOL = 1e-12


def is_diagonally_dominant(A: SymSparseMatrix) -> tuple[bool, np.ndarray]:
    """Return ``(flag, margins)`` with ``margins_i = A_ii - sum_{j != i} |A_ij|``.

    Margins within ``1e-12 * (|A_ii| + sum_j |A_ij|)`` of zero are rounding
    residue of real-valued weights and are reported as exactly zero.
    """
    margins = np.zeros(A.n)
    scale = np.zeros(A.n)
    for i, j, v in A.entries():
        if i == j:
            margins[i] += v
            scale[i] += abs(v)
        else:
            margins[i] -= abs(v)
            margins[j] -= abs(v)
            scale[i] += abs(v)
            scale[j] += abs(v)
    margins[np.abs(margins) <= DD_TOL * scale] = 0.0
    return bool(np.all(margins >= 0)), margins


def _require_dd(A: SymSparseMatrix) -> np.ndarray:
    ok, margins = is_diagonally_dominant(A)
    if not ok:
        worst = int(np.argmin(margins))
        raise NotDiagonallyDominantError(worst, float(margins[worst]))
    return margins


def laplacian_to_graph(A: SymSparseMatrix) -> WeightedGraph:
    margins = _require_dd(A)
    edges = [(j, i, -v) for i, j, v in A.entries() if i != j]
    return WeightedGraph(A.n, edges, margins)


def graph_to_laplacian(G: WeightedGraph) -> SymSparseMatrix:
    diag = list(G.d)
    entries = []
    for i, j, c in G.edges:
        entries.append((j, i, -c))
        diag[i] += abs(c)
        diag[j] += abs(c)
    entries.extend((i, i, x) for i, x in enumerate(diag))
    return SymSparseMatrix.from_entries(G.n, entries)


# incidence factorization ------------------------------------------------


class _Column:
    """Incidence column; ``weight`` is the squared scale, kept exactly."""

    __slots__ = ()

    @property
    def scale(self) -> float:
        return math.sqrt(self.weight)


@dataclass(frozen=True, order=True)
class PositiveEdge(_Column):
    """Column ``scale * (e_i - e_j)``; stands for a negative off-diagonal entry."""

    i: int
    j: int
    weight: float


@dataclass(frozen=True, order=True)
class NegativeEdge(_Column):
    """Column ``scale * (e_i + e_j)``; stands for a positive off-diagonal entry."""

    i: int
    j: int
    weight: float


@dataclass(frozen=True, order=True)
class Vertex(_Column):
    i: int
    weight: float


@dataclass(frozen=True)
class IncidenceMatrix:
    n: int
    columns: tuple

    def __post_init__(self):
        pairs, verts = set(), set()
        for col in self.columns:
            if not col.weight > 0:
                raise ValueError(f"column {col} has nonpositive scale")
            if isinstance(col, Vertex):
                if not 0 <= col.i < self.n or col.i in verts:
                    raise ValueError(f"bad or duplicate vertex column {col.i}")
                verts.add(col.i)
            else:
                if not (0 <= col.i < col.j < self.n):
                    raise ValueError(f"edge column {col} must satisfy i < j < n")
                if (col.i, col.j) in pairs:
                    raise ValueError(f"duplicate edge column ({col.i}, {col.j})")
                pairs.add((col.i, col.j))

    def to_dense(self) -> np.ndarray:
        U = np.zeros((self.n, len(self.columns)))
        for k, col in enumerate(self.columns):
            U[col.i, k] = col.scale
            if isinstance(col, PositiveEdge):
                U[col.j, k] = -col.scale
            elif isinstance(col, NegativeEdge):
                U[col.j, k] = col.scale
        return U


def canonical_incidence_factor(A: SymSparseMatrix) -> IncidenceMatrix:
    """Columns for each off-diagonal pair (by pair), then one per strictly dominant row."""
    margins = _require_dd(A)
    cols = []
    for i, j, v in A.entries():
        if i == j:
            continue
        cls = PositiveEdge if v < 0 else NegativeEdge
        cols.append(cls(min(i, j), max(i, j), abs(v)))
    cols.sort(key=lambda c: (c.i, c.j))
    cols.extend(Vertex(i, float(m)) for i, m in enumerate(margins) if m > 0)
    return IncidenceMatrix(A.n, tuple(cols))


def expand_incidence(U: IncidenceMatrix) -> SymSparseMatrix:
    """Return ``U U^T`` by summing the rank-one contribution of each column."""
    entries = []
    for col in U.columns:
        w = col.weight
        entries.append((col.i, col.i, w))
        if isinstance(col, Vertex):
            continue
        entries.append((col.j, col.j, w))
        entries.append((col.j, col.i, -w if isinstance(col, PositiveEdge) else w))
    return SymSparseMatrix.from_entries(U.n, entries)


# resistive networks --------------------------------------------------------


def dirichlet_reduce(A: SymSparseMatrix, b, fixed) -> tuple[SymSparseMatrix, np.ndarray]:
    """Eliminate nodes with known values, moving their contribution to the right-hand side.

    ``fixed`` is a sequence of ``(node, value)``. The returned system is indexed by
    the free nodes in increasing order.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (A.n,):
        raise ValueError("right-hand side length does not match matrix order")
    known: dict[int, float] = {}
    for node, val in fixed:
        node = int(node)
        if not 0 <= node < A.n:
            raise IndexError(f"fixed node {node} out of range")
        if node in known:
            raise ValueError(f"node {node} fixed twice")
        known[node] = float(val)
    if not known:
        return A, b.copy()
    free = [i for i in range(A.n) if i not in known]
    new_index = {old: k for k, old in enumerate(free)}
    bb = b.copy()
    entries = []
    for i, j, v in A.entries():
        fi, fj = i in known, j in known
        if not fi and not fj:
            entries.append((new_index[i], new_index[j], v))
        elif fi and not fj:
            bb[j] -= known[i] * v
        elif fj and not fi:
            bb[i] -= known[j] * v
    return SymSparseMatrix.from_entries(len(free), entries), bb[free]


def power(A: SymSparseMatrix, x) -> float:
    """Quadratic form ``x^T A x`` (dissipated power when ``x`` are node voltages)."""
    from .sparse import matvec

    x = np.asarray(x, dtype=np.float64)
    return float(x @ matvec(A, x))
