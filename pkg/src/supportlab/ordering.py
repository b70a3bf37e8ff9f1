"""Fill characterization and fill-reducing orderings."""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .sparse import MeshSpec, Permutation, SymSparseMatrix


class NotAForestError(ValueError):
    pass


class SeparatorError(ValueError):
    pass


class PatternGraph:
    """Undirected unweighted graph on ``0..n-1`` with sorted adjacency lists."""

    __slots__ = ("n", "adj")

    def __init__(self, n: int, adj: Iterable[Iterable[int]]):
        self.n = int(n)
        self.adj = tuple(tuple(sorted(set(int(u) for u in a))) for a in adj)
        if len(self.adj) != self.n:
            raise ValueError("adjacency must have one list per vertex")
        for v, a in enumerate(self.adj):
            for u in a:
                if u == v:
                    raise ValueError(f"self loop at {v}")
                if not 0 <= u < self.n or v not in self.adj[u]:
                    raise ValueError(f"adjacency is not symmetric at ({v}, {u})")

    @classmethod
    def from_edges(cls, n: int, edges) -> "PatternGraph":
        adj = [set() for _ in range(n)]
        for i, j in edges:
            if i != j:
                adj[i].add(j)
                adj[j].add(i)
        return cls(n, adj)

    @classmethod
    def from_matrix(cls, A: SymSparseMatrix) -> "PatternGraph":
        return cls.from_edges(A.n, ((i, j) for i, j, _ in A.entries() if i != j))

    @classmethod
    def from_graph(cls, G) -> "PatternGraph":
        return cls.from_edges(G.n, ((i, j) for i, j, _ in G.edges))

    def edges(self) -> set[tuple[int, int]]:
        return {(u, v) for u in range(self.n) for v in self.adj[u] if u < v}

    def permuted(self, P: Permutation) -> "PatternGraph":
        inv = P.inv
        return PatternGraph.from_edges(self.n, ((int(inv[u]), int(inv[v])) for u, v in self.edges()))

    def subgraph(self, vertices) -> tuple["PatternGraph", list[int]]:
        """Induced subgraph on ``vertices`` (relabelled in ascending order) and the label map."""
        vs = sorted(vertices)
        loc = {v: k for k, v in enumerate(vs)}
        return PatternGraph(len(vs), [[loc[u] for u in self.adj[v] if u in loc] for v in vs]), vs

    def __eq__(self, other) -> bool:
        return isinstance(other, PatternGraph) and self.n == other.n and self.adj == other.adj

    __hash__ = None

    def __repr__(self) -> str:
        return f"PatternGraph(n={self.n}, m={sum(map(len, self.adj)) // 2})"


# fill characterizations -------------------------------------------------------


def eliminate_vertex(G: PatternGraph, j: int) -> PatternGraph:
    """Add a clique on the neighbors of ``j`` numbered above ``j``."""
    if not 0 <= j < G.n:
        raise IndexError(f"vertex {j} out of range")
    adj = [set(a) for a in G.adj]
    higher = [u for u in G.adj[j] if u > j]
    for a in higher:
        adj[a].update(u for u in higher if u != a)
    return PatternGraph(G.n, adj)


def fill_graph(G: PatternGraph) -> PatternGraph:
    """Eliminate vertices ``0..n-1`` in order and return the resulting graph."""
    adj = [set(a) for a in G.adj]
    for j in range(G.n):
        higher = [u for u in adj[j] if u > j]
        for a in higher:
            adj[a].update(u for u in higher if u != a)
    return PatternGraph(G.n, adj)


def fill_path_oracle(G: PatternGraph, i: int, j: int) -> bool:
    """True iff a path joins ``i`` and ``j`` whose interior vertices are all below ``min(i, j)``."""
    if i == j:
        raise ValueError("query needs two distinct vertices")
    lo = min(i, j)
    seen = {i}
    todo = deque([i])
    while todo:
        v = todo.popleft()
        for u in G.adj[v]:
            if u == j:
                return True
            if u < lo and u not in seen:
                seen.add(u)
                todo.append(u)
    return False


@dataclass(frozen=True)
class EliminationTree:
    """``parent[k]`` is the column whose clique absorbs clique ``k``; ``-1`` marks a root."""

    parent: tuple[int, ...]

    def children(self) -> list[list[int]]:
        ch: list[list[int]] = [[] for _ in self.parent]
        for k, p in enumerate(self.parent):
            if p >= 0:
                ch[p].append(k)
        return ch


class CliqueCover:
    """Edges of a partially eliminated graph represented as a set of cliques.

    ``vertex_lists[v]`` maps the ids of the live cliques containing ``v`` (insertion
    ordered dict, standing in for a doubly linked list); ``names[c]`` is the
    eliminated vertex whose clique ``c`` is, or ``None``.
    """

    def __init__(self, G: PatternGraph):
        self.cliques: list[tuple[int, ...] | None] = []
        self.names: list[int | None] = []
        self.vertex_lists: list[dict[int, None]] = [dict() for _ in range(G.n)]
        for u, v in sorted(G.edges()):
            self.add((u, v), None)

    def add(self, members, name) -> int:
        cid = len(self.cliques)
        self.cliques.append(tuple(members))
        self.names.append(name)
        for v in members:
            self.vertex_lists[v][cid] = None
        return cid

    def retire(self, cid: int) -> None:
        for v in self.cliques[cid]:
            del self.vertex_lists[v][cid]
        self.cliques[cid] = None

    def neighbors(self, v: int) -> set[int]:
        out: set[int] = set()
        for cid in self.vertex_lists[v]:
            out.update(self.cliques[cid])
        out.discard(v)
        return out

    def eliminate(self, v: int) -> tuple[list[int], list[int]]:
        """Merge every clique containing ``v`` into one clique named ``v`` without ``v``.

        Returns the sorted new clique and the names of the merged cliques.
        """
        merged = list(self.vertex_lists[v])
        members = self.neighbors(v)
        named = [self.names[c] for c in merged if self.names[c] is not None]
        for c in merged:
            self.retire(c)
        new = sorted(members)
        if new:
            self.add(new, v)
        return new, named


def symbolic_elimination(G: PatternGraph) -> tuple[list[list[int]], EliminationTree]:
    """Column structures of the cancellation-free factor (diagonal included) and the etree."""
    cover = CliqueCover(G)
    parent = [-1] * G.n
    cols = []
    for k in range(G.n):
        new, named = cover.eliminate(k)
        for p in named:
            parent[p] = k
        cols.append([k] + new)
    return cols, EliminationTree(tuple(parent))


def symbolic_fill(G: PatternGraph) -> int:
    """Stored entries of ``L`` (diagonal included) for the natural order of ``G``."""
    return sum(len(c) for c in symbolic_elimination(G)[0])


def symbolic_flops(G: PatternGraph) -> int:
    """Operation count of the sparse factorization predicted from the symbolic structure."""
    total = 0
    for c in symbolic_elimination(G)[0]:
        e = len(c) - 1
        total += 1 + e + e * (e + 1) // 2
    return total


# minimum degree ----------------------------------------------------------------


def _minimum_degree(G: PatternGraph, record: bool):
    cover = CliqueCover(G)
    deg = [len(G.adj[v]) for v in range(G.n)]
    alive = [True] * G.n
    heap = [(deg[v], v) for v in range(G.n)]
    heapq.heapify(heap)
    order, trace = [], []
    while heap:
        d, v = heapq.heappop(heap)
        if not alive[v] or d != deg[v]:
            continue
        if record:
            trace.append((v, d, min(deg[u] for u in range(G.n) if alive[u])))
        alive[v] = False
        order.append(v)
        new, _ = cover.eliminate(v)
        for u in new:
            deg[u] = len(cover.neighbors(u))
            heapq.heappush(heap, (deg[u], u))
    return Permutation(order), trace


def minimum_degree(G: PatternGraph) -> Permutation:
    """Repeatedly eliminate a vertex of smallest exact current degree (ties: smallest index)."""
    return _minimum_degree(G, False)[0]


def minimum_degree_trace(G: PatternGraph) -> tuple[Permutation, list[tuple[int, int, int]]]:
    """Like :func:`minimum_degree`, also returning ``(vertex, its degree, min live degree)`` per step."""
    return _minimum_degree(G, True)


# nested dissection on meshes ------------------------------------------------------

ND_LEAF = 16


def _box_vertices(spec: MeshSpec, box) -> list[int]:
    ranges = [range(lo, hi) for lo, hi in box]
    if len(box) == 2:
        return [spec.index(x, y) for y in ranges[1] for x in ranges[0]]
    return [spec.index(x, y, z) for z in ranges[2] for y in ranges[1] for x in ranges[0]]


def _split_axes(ext: list[int]) -> list[int]:
    emax = max(ext)
    axes = [a for a, e in enumerate(ext) if e >= 3 and 2 * e >= emax]
    if len(ext) == 2 and len(axes) == 2:
        m = ext[0] * ext[1]
        if ext[0] + ext[1] - 1 > 2 * math.sqrt(m) + 1:
            axes = [int(np.argmax(ext))]
    return axes


def nd_mesh(spec, *, separators: list | None = None) -> Permutation:
    """Nested dissection of a regular 2D/3D mesh with axis-aligned (cross) separators.

    Boxes with at most 16 vertices, or with a single non-unit extent (paths, which
    have zero-fill orderings), are ordered by minimum degree on the induced
    subgraph. When ``separators`` is a list, ``(box size, separator size)`` is
    appended for every split.
    """
    if not isinstance(spec, MeshSpec):
        spec = MeshSpec(tuple(spec))
    G = mesh_pattern(spec)
    order: list[int] = []
    stack = [("box", tuple((0, d) for d in spec.dims))]
    # explicit stack of pending work; separators are emitted after their sub-boxes
    while stack:
        kind, item = stack.pop()
        if kind == "emit":
            order.extend(item)
            continue
        box = item
        ext = [hi - lo for lo, hi in box]
        m = int(np.prod(ext))
        if m == 0:
            continue
        axes = _split_axes(ext)
        if m <= ND_LEAF or sum(e > 1 for e in ext) <= 1 or not axes:
            verts = _box_vertices(spec, box)
            sub, labels = G.subgraph(verts)
            order.extend(labels[int(k)] for k in minimum_degree(sub).perm)
            continue
        mids = {a: box[a][0] + (ext[a] - 1) // 2 for a in axes}
        sep = [v for v in _box_vertices(spec, box)
               if any(spec.coords(v)[a] == mids[a] for a in axes)]
        if separators is not None:
            separators.append((m, len(sep)))
        subs = [list(box)]
        for a in axes:
            nxt = []
            for b in subs:
                lo, hi = b[a]
                for piece in ((lo, mids[a]), (mids[a] + 1, hi)):
                    c = list(b)
                    c[a] = piece
                    nxt.append(c)
            subs = nxt
        stack.append(("emit", sorted(sep)))
        for b in reversed(subs):
            stack.append(("box", tuple(b)))
    return Permutation(order)


def mesh_pattern(spec) -> PatternGraph:
    if not isinstance(spec, MeshSpec):
        spec = MeshSpec(tuple(spec))
    return PatternGraph.from_edges(spec.n, ((u, v) for _, u, v in spec.edges()))


# generalized nested dissection -------------------------------------------------------


class GridBisector:
    """Separator for subsets of a mesh: the median line (plane) across the longer axis.

    ``alpha`` and ``beta`` describe the family: parts hold at most about ``alpha*|W|``
    vertices and the separator at most ``beta*sqrt(|W|)`` (2D boxes). With these
    values the recursion bottoms out at 9 vertices.
    """

    alpha = 0.5
    beta = 6.0

    def __init__(self, spec):
        self.spec = spec if isinstance(spec, MeshSpec) else MeshSpec(tuple(spec))

    def __call__(self, G: PatternGraph, W: set[int]):
        coords = {v: self.spec.coords(v) for v in W}
        dim = len(self.spec.dims)
        lo = [min(c[a] for c in coords.values()) for a in range(dim)]
        hi = [max(c[a] for c in coords.values()) for a in range(dim)]
        axis = max(range(dim), key=lambda a: (hi[a] - lo[a], -a))
        mid = lo[axis] + (hi[axis] - lo[axis]) // 2
        S = {v for v, c in coords.items() if c[axis] == mid}
        V1 = {v for v, c in coords.items() if c[axis] < mid}
        V2 = {v for v, c in coords.items() if c[axis] > mid}
        return S, V1, V2


def _components(G: PatternGraph, vertices=None) -> list[list[int]]:
    allowed = set(range(G.n)) if vertices is None else set(vertices)
    seen: set[int] = set()
    comps = []
    for s in sorted(allowed):
        if s in seen:
            continue
        seen.add(s)
        comp, todo = [s], [s]
        while todo:
            v = todo.pop()
            for u in G.adj[v]:
                if u in allowed and u not in seen:
                    seen.add(u)
                    comp.append(u)
                    todo.append(u)
        comps.append(sorted(comp))
    return comps


def _check_separator(G: PatternGraph, W: set[int], S, V1, V2) -> None:
    S, V1, V2 = set(S), set(V1), set(V2)
    if S & V1 or S & V2 or V1 & V2:
        raise SeparatorError("separator parts overlap")
    if S | V1 | V2 != W:
        raise SeparatorError("separator parts do not cover the vertex set")
    for v in V1:
        for u in G.adj[v]:
            if u in V2:
                raise SeparatorError(f"edge ({v}, {u}) crosses between the two sides")
    if not V1 or not V2:
        raise SeparatorError("separator made no progress (one side is empty)")


def lrt_order(G: PatternGraph, separator: Callable) -> Permutation:
    """Generalized nested dissection driven by a separator function.

    ``separator(G, W)`` returns ``(S, V1, V2)`` for a vertex set ``W`` and carries
    ``alpha`` and ``beta`` attributes; sets no larger than ``(beta*(1-alpha))**2``
    are numbered directly. Connected components are ordered one after another.
    """
    threshold = (separator.beta * (1.0 - separator.alpha)) ** 2
    pos = [-1] * G.n

    def number(W: set[int], hi: int) -> None:
        todo = [(W, hi)]
        while todo:
            W, hi = todo.pop()
            free = sorted(v for v in W if pos[v] < 0)
            if not free:
                continue
            if len(W) <= threshold:
                for k, v in enumerate(free):
                    pos[v] = hi - len(free) + k
                continue
            S, V1, V2 = separator(G, W)
            _check_separator(G, W, S, V1, V2)
            s_free = sorted(v for v in S if pos[v] < 0)
            for k, v in enumerate(s_free):
                pos[v] = hi - len(s_free) + k
            top1 = hi - len(s_free)
            n1 = sum(1 for v in V1 if pos[v] < 0)
            S = set(S)
            todo.append((set(V2) | S, top1 - n1))
            todo.append((set(V1) | S, top1))

    hi = 0
    for comp in _components(G):
        hi += len(comp)
        number(set(comp), hi)
    inv = np.asarray(pos)
    return Permutation(np.argsort(inv))


# trees -----------------------------------------------------------------------------


def tree_postorder(G: PatternGraph) -> Permutation:
    """Depth-first postorder of each tree, rooted at its highest-numbered vertex."""
    m = sum(len(a) for a in G.adj) // 2
    comps = _components(G)
    if m != G.n - len(comps):
        raise NotAForestError(f"graph with {G.n} vertices, {m} edges and {len(comps)} components has a cycle")
    order: list[int] = []
    for comp in comps:
        root = comp[-1]
        stack = [(root, -1, iter(G.adj[root]))]
        while stack:
            v, par, it = stack[-1]
            for u in it:
                if u != par:
                    stack.append((u, v, iter(G.adj[u])))
                    break
            else:
                stack.pop()
                order.append(v)
    return Permutation(order)
