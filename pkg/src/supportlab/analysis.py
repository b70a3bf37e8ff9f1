"""Path embeddings into forests, their congestion/dilation/stretch, and a dense pencil oracle."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .graph import WeightedGraph
from .ordering import PatternGraph, _components
from .sparse import SymSparseMatrix

RANK_TOL = 1e-10
NULL_TOL = 1e-8
MAX_DENSE = 400


class EmbeddingError(ValueError):
    pass


class PencilError(ValueError):
    pass


@dataclass(frozen=True)
class EmbeddedEdge:
    """An A-edge ``(i, j)`` of weight ``a`` routed along ``path`` (vertices from ``i`` to ``j``)."""

    i: int
    j: int
    a: float
    path: tuple[int, ...]
    b: tuple[float, ...]  # forest weights of the consecutive path edges

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(min(u, v), max(u, v)) for u, v in zip(self.path, self.path[1:])]


@dataclass(frozen=True)
class PathEmbedding:
    forest: WeightedGraph
    paths: tuple[EmbeddedEdge, ...]


def tree_paths(G_A: WeightedGraph, forest: WeightedGraph) -> PathEmbedding:
    """Route every edge of ``G_A`` along its unique path in ``forest``."""
    if forest.n != G_A.n:
        raise EmbeddingError("graphs have different vertex counts")
    comps = _components(PatternGraph.from_graph(forest))
    if forest.m != forest.n - len(comps):
        raise EmbeddingError("support graph is not a forest")
    adj = defaultdict(list)
    for u, v, c in forest.edges:
        adj[u].append((v, abs(c)))
        adj[v].append((u, abs(c)))
    parent = [-1] * forest.n
    pweight = [0.0] * forest.n
    depth = [0] * forest.n
    comp_of = [0] * forest.n
    for cid, comp in enumerate(comps):
        root = comp[-1]
        stack = [root]
        while stack:
            v = stack.pop()
            comp_of[v] = cid
            for u, w in adj[v]:
                if u != parent[v]:
                    parent[u], pweight[u], depth[u] = v, w, depth[v] + 1
                    stack.append(u)

    out = []
    for i, j, c in G_A.edges:
        if comp_of[i] != comp_of[j]:
            raise EmbeddingError(f"edge ({i}, {j}) joins vertices in different trees of the support forest")
        left, lw, right, rw = [i], [], [j], []
        u, v = i, j
        while u != v:
            if depth[u] >= depth[v]:
                lw.append(pweight[u])
                u = parent[u]
                left.append(u)
            else:
                rw.append(pweight[v])
                v = parent[v]
                right.append(v)
        path = tuple(left + right[-2::-1])
        out.append(EmbeddedEdge(i, j, abs(c), path, tuple(lw + rw[::-1])))
    return PathEmbedding(forest, tuple(out))


@dataclass(frozen=True)
class EmbeddingMetrics:
    dilation: dict
    stretch: dict
    congestion: dict
    max_dilation: float
    max_congestion: float
    max_stretch: float
    total_stretch: float


def metrics(e: PathEmbedding) -> EmbeddingMetrics:
    """Per-edge dilation ``sum sqrt(a/b)``, stretch ``sum a/b``, and per-forest-edge congestion.

    Congestion of a forest edge sums ``sqrt(a/b)`` over the paths that use it.
    """
    dil, st = {}, {}
    cong = {(u, v): 0.0 for u, v, _ in e.forest.edges}
    for p in e.paths:
        ratios = [p.a / b for b in p.b]
        dil[(p.i, p.j)] = float(sum(np.sqrt(ratios)))
        st[(p.i, p.j)] = float(sum(ratios))
        for edge, r in zip(p.edges, ratios):
            cong[edge] += float(np.sqrt(r))
    return EmbeddingMetrics(
        dilation=dil,
        stretch=st,
        congestion=cong,
        max_dilation=max(dil.values(), default=0.0),
        max_congestion=max(cong.values(), default=0.0),
        max_stretch=max(st.values(), default=0.0),
        total_stretch=float(sum(st.values())),
    )


def kappa_bound(e: PathEmbedding) -> float:
    """Upper bound ``max(1, max dilation) * max(1, max congestion)`` on the condition number."""
    m = metrics(e)
    return max(1.0, m.max_dilation) * max(1.0, m.max_congestion)


@dataclass(frozen=True)
class PencilEigs:
    """Determined eigenvalues of ``S x = lambda T x``; ``undetermined`` counts null directions of ``T``."""

    values: np.ndarray
    rank: int
    undetermined: int


def _dense(M) -> np.ndarray:
    if isinstance(M, SymSparseMatrix):
        return M.to_dense()
    return np.asarray(M, dtype=np.float64)


def gen_eigs_dense(S, T) -> PencilEigs:
    """Eigenvalues of a symmetric / positive-semidefinite pencil, restricted to ``range(T)``."""
    S, T = _dense(S), _dense(T)
    if S.shape != T.shape or S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise PencilError("S and T must be square matrices of equal size")
    if not (np.allclose(S, S.T, rtol=1e-12, atol=0) and np.allclose(T, T.T, rtol=1e-12, atol=0)):
        raise PencilError("pencil matrices must be symmetric")
    w, V = np.linalg.eigh((T + T.T) / 2)
    tnorm = float(np.max(np.abs(w))) if len(w) else 0.0
    if tnorm == 0.0:
        return PencilEigs(np.zeros(0), 0, S.shape[0])
    if w[0] < -RANK_TOL * tnorm:
        raise PencilError("T is not positive semidefinite")
    keep = w > RANK_TOL * tnorm
    N = V[:, ~keep]
    snorm = max(1.0, float(np.linalg.norm(S, 2)))
    if N.shape[1] and np.max(np.linalg.norm(S @ N, axis=0)) > NULL_TOL * snorm:
        raise PencilError("null space of T is not contained in the null space of S")
    Vr = V[:, keep]
    scale = 1.0 / np.sqrt(w[keep])
    M = (Vr * scale).T @ S @ (Vr * scale)
    vals = np.linalg.eigvalsh((M + M.T) / 2)
    return PencilEigs(np.sort(vals), int(keep.sum()), int((~keep).sum()))


def condition_number(A, B) -> float:
    """Ratio of the extreme determined eigenvalues of the pencil ``(A, B)``."""
    n = A.n if isinstance(A, SymSparseMatrix) else np.asarray(A).shape[0]
    if n > MAX_DENSE:
        raise ValueError(f"dense pencil oracle is limited to order {MAX_DENSE}")
    vals = gen_eigs_dense(A, B).values
    if len(vals) == 0 or vals[0] <= 0:
        raise PencilError("pencil has a nonpositive determined eigenvalue")
    return float(vals[-1] / vals[0])
