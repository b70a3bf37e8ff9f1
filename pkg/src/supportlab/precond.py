"""Support preconditioners: Joshi mesh sparsifiers, maximum spanning forests, Vaidya trees."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cholesky import CholFactor, SemidefiniteRankError, sparse_cholesky
from .graph import WeightedGraph, graph_to_laplacian, is_diagonally_dominant, laplacian_to_graph
from .ordering import NotAForestError, PatternGraph, _components, minimum_degree, tree_postorder
from .sparse import MeshSpec, Permutation, SymSparseMatrix, mesh_laplacian, permute_sym

RIDGE = 1e-12


class NotASubgraphError(ValueError):
    pass


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, v: int) -> int:
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:
            self.parent[v], v = root, self.parent[v]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def mesh_graph(spec) -> WeightedGraph:
    """Weighted graph of :func:`mesh_laplacian`: unit edges, vertex weight 1 at vertex 0."""
    if not isinstance(spec, MeshSpec):
        spec = MeshSpec(tuple(spec))
    d = [0.0] * spec.n
    d[0] = 1.0
    return WeightedGraph(spec.n, [(u, v, 1.0) for _, u, v in spec.edges()], d)


def joshi_subgraph(spec, k: int) -> WeightedGraph:
    """Sparsified mesh keeping every edge along the last axis and the others on a ``k``-spaced lattice.

    2D: all y-edges, x-edges only in rows with ``y % k == 0``.
    3D: all z-edges, y-edges in planes ``z % k == 0``, x-edges on lines with
    ``y % k == 0`` and ``z % k == 0``.
    """
    if not isinstance(spec, MeshSpec):
        spec = MeshSpec(tuple(spec))
    k = int(k)
    if k < 1:
        raise ValueError("k must be at least 1")
    dim = len(spec.dims)
    full = mesh_graph(spec)
    keep = []
    for axis, u, v in spec.edges():
        c = spec.coords(u)
        if axis == dim - 1 or all(c[a] % k == 0 for a in range(axis + 1, dim)):
            keep.append((u, v, 1.0))
    return WeightedGraph(spec.n, keep, full.d)


def max_spanning_forest(G: WeightedGraph) -> WeightedGraph:
    """Kruskal from heavy to light edges (ties by endpoint pair) with union-find."""
    if not G.is_unsigned:
        raise ValueError("maximum spanning forest needs positive edge weights")
    uf = UnionFind(G.n)
    kept = [(i, j, c) for i, j, c in sorted(G.edges, key=lambda e: (-e[2], e[0], e[1])) if uf.union(i, j)]
    return WeightedGraph(G.n, kept, G.d)


def _check_forest(G: WeightedGraph) -> list[list[int]]:
    comps = _components(PatternGraph.from_graph(G))
    if G.m != G.n - len(comps):
        raise NotAForestError("input graph contains a cycle")
    return comps


@dataclass(frozen=True)
class VaidyaParams:
    t: int

    def __post_init__(self):
        if int(self.t) < 1:
            raise ValueError("t must be at least 1")


def tree_partition(forest: WeightedGraph, p: VaidyaParams | int) -> tuple[list[int], int]:
    """Split a forest into connected subtrees of at most ``ceil(n/t)`` vertices.

    Each tree is rooted at its highest-numbered vertex and visited in postorder;
    a vertex whose accumulated size exceeds the cap detaches its largest
    remaining child subtrees (each becomes a part) until it fits.
    """
    t = p.t if isinstance(p, VaidyaParams) else int(p)
    if t < 1:
        raise ValueError("t must be at least 1")
    n = forest.n
    if t > n and n > 0:
        raise ValueError("t may not exceed the number of vertices")
    comps = _check_forest(forest)
    cap = math.ceil(n / t) if n else 0
    adj = forest.adjacency()
    part = [-1] * n
    size = [0] * n
    parent = [-1] * n
    count = 0
    preorders = []
    for comp in comps:
        root = comp[-1]
        pre, stack = [], [root]
        parent[root] = -1
        while stack:
            v = stack.pop()
            pre.append(v)
            for u in adj[v]:
                if u != parent[v]:
                    parent[u] = v
                    stack.append(u)
        preorders.append(pre)
        for v in reversed(pre):
            kids = [u for u in adj[v] if u != parent[v] and part[u] < 0]
            size[v] = 1 + sum(size[u] for u in kids)
            if size[v] > cap:
                for u in sorted(kids, key=lambda u: (-size[u], u)):
                    if size[v] <= cap:
                        break
                    part[u] = count
                    count += 1
                    size[v] -= size[u]
        part[root] = count
        count += 1
    for pre in preorders:
        for v in pre:
            if part[v] < 0:
                part[v] = part[parent[v]]
    return part, count


def _require_subgraph(sub: WeightedGraph, G: WeightedGraph, what: str) -> None:
    if sub.n != G.n:
        raise NotASubgraphError(f"{what} has {sub.n} vertices, expected {G.n}")
    edges = G.edge_dict()
    for i, j, c in sub.edges:
        if edges.get((i, j)) != c:
            raise NotASubgraphError(f"{what} edge ({i}, {j}, {c:g}) is not an edge of the base graph")


def vaidya_augment(G_A: WeightedGraph, forest: WeightedGraph, p: VaidyaParams | int) -> WeightedGraph:
    """Add the heaviest off-forest ``G_A`` edge between every pair of subtrees of the partitioned forest.

    Ties go to the lexicographically smallest endpoint pair.
    """
    _require_subgraph(forest, G_A, "forest")
    part, _ = tree_partition(forest, p)
    present = {(i, j) for i, j, _ in forest.edges}
    best: dict[tuple[int, int], tuple[int, int, float]] = {}
    for i, j, c in G_A.edges:
        a, b = part[i], part[j]
        if a == b or (i, j) in present:
            continue
        key = (min(a, b), max(a, b))
        if key not in best or c > best[key][2]:
            best[key] = (i, j, c)
    return WeightedGraph(forest.n, list(forest.edges) + list(best.values()), forest.d)


@dataclass(frozen=True)
class ForestPrecond:
    """A factored support preconditioner ``B`` with ``P (B + ridge I) P^T = L L^T``."""

    graph: WeightedGraph
    B: SymSparseMatrix
    factor: CholFactor
    order: Permutation
    ridge: float = 0.0

    def solve(self, r) -> np.ndarray:
        """Apply ``B^{-1}`` (of the ridge-shifted matrix when a ridge was needed)."""
        return self.order.unapply(self.factor.solve(self.order.apply(np.asarray(r, dtype=np.float64))))


def _singular(G: WeightedGraph) -> bool:
    comps = _components(PatternGraph.from_graph(G))
    return any(all(G.d[v] == 0 for v in comp) for comp in comps)


def build_precond(G_B: WeightedGraph, base: SymSparseMatrix, order: Permutation | None = None) -> ForestPrecond:
    """Form ``B`` from ``G_B`` with the vertex weights of ``base`` and factor it.

    Unless ``order`` is given, forests are ordered by tree postorder (no fill)
    and other graphs by minimum degree. Singular ``B`` is shifted by
    ``1e-12 * max diag`` before factoring.
    """
    ok, margins = is_diagonally_dominant(base)
    if not ok:
        raise ValueError("base matrix is not diagonally dominant")
    _require_subgraph(G_B, laplacian_to_graph(base), "preconditioner graph")
    G = G_B.with_vertex_weights(np.maximum(margins, 0.0))
    B = graph_to_laplacian(G)
    if order is None:
        pattern = PatternGraph.from_graph(G)
        try:
            order = tree_postorder(pattern)
        except NotAForestError:
            order = minimum_degree(pattern)
    PB = permute_sym(B, order)
    ridge = RIDGE * float(np.max(B.diagonal())) if _singular(G) else 0.0
    if ridge == 0.0:
        try:
            F = sparse_cholesky(PB)
        except SemidefiniteRankError:
            ridge = RIDGE * float(np.max(B.diagonal()))
    if ridge > 0.0:
        F = sparse_cholesky(_shift(PB, ridge))
    return ForestPrecond(G, B, F, order, ridge)


def _shift(A: SymSparseMatrix, delta: float) -> SymSparseMatrix:
    entries = list(A.entries()) + [(i, i, delta) for i in range(A.n)]
    return SymSparseMatrix.from_entries(A.n, entries)


def joshi_precond(spec, k: int) -> ForestPrecond:
    return build_precond(joshi_subgraph(spec, k), mesh_laplacian(spec))


def msf_precond(A: SymSparseMatrix) -> ForestPrecond:
    return build_precond(max_spanning_forest(laplacian_to_graph(A)), A)


def vaidya_precond(A: SymSparseMatrix, t: int) -> ForestPrecond:
    G = laplacian_to_graph(A)
    return build_precond(vaidya_augment(G, max_spanning_forest(G), VaidyaParams(t)), A)


def parse_precond_spec(text: str) -> tuple[str, int | None]:
    """Parse ``none``, ``msf``, ``joshi:K`` or ``vaidya:T``."""
    kind, _, arg = text.strip().lower().partition(":")
    if kind in ("none", "msf"):
        if arg:
            raise ValueError(f"preconditioner {kind!r} takes no parameter")
        return kind, None
    if kind in ("joshi", "vaidya"):
        try:
            value = int(arg)
        except ValueError:
            raise ValueError(f"preconditioner {kind!r} needs an integer parameter, e.g. {kind}:4") from None
        if value < 1:
            raise ValueError(f"{kind} parameter must be at least 1")
        return kind, value
    raise ValueError(f"unknown preconditioner {text!r}")


def support_graph(kind: str, param: int | None, A: SymSparseMatrix, spec: MeshSpec | None = None) -> WeightedGraph:
    """Support graph of ``A`` for a parsed preconditioner spec."""
    if kind == "joshi":
        if spec is None:
            raise ValueError("joshi preconditioners need a mesh")
        return joshi_subgraph(spec, param).with_vertex_weights(is_diagonally_dominant(A)[1])
    G = laplacian_to_graph(A)
    forest = max_spanning_forest(G)
    if kind == "msf":
        return forest
    if kind == "vaidya":
        return vaidya_augment(G, forest, VaidyaParams(param))
    raise ValueError(f"no support graph for {kind!r}")
