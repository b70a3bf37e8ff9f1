"""Random instance generators shared by the test modules."""

import numpy as np

from supportlab.graph import WeightedGraph, graph_to_laplacian

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def random_connected_graph(rng, n, extra=None, weights=(1, 10), integer=True):
    """Random spanning tree plus ``extra`` chords, positive weights."""
    edges = {}
    perm = rng.permutation(n)
    for k in range(1, n):
        u, v = int(perm[k]), int(perm[rng.integers(0, k)])
        edges[(min(u, v), max(u, v))] = None
    extra = n if extra is None else extra
    for _ in range(extra):
        u, v = rng.integers(0, n, size=2)
        if u != v:
            edges[(min(u, v), max(u, v))] = None
    lo, hi = weights
    out = []
    for i, j in sorted(edges):
        w = float(rng.integers(lo, hi + 1)) if integer else float(rng.uniform(lo, hi))
        out.append((i, j, w))
    return out


def random_graph_edges(rng, n, p):
    return [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]


def random_dd_matrix(rng, n, signed=True, integer=True, p=0.3):
    """Diagonally dominant matrix from a random signed graph with random margins."""
    edges = []
    for i, j in random_graph_edges(rng, n, p):
        c = float(rng.integers(1, 6)) if integer else float(rng.uniform(0.1, 5))
        if signed and rng.random() < 0.3:
            c = -c
        edges.append((i, j, c))
    d = [float(rng.integers(0, 3)) if integer else float(rng.uniform(0, 2)) for _ in range(n)]
    return graph_to_laplacian(WeightedGraph(n, edges, d))


def random_spd(rng, n, p=0.3):
    """Random diagonally dominant Laplacian plus a unit ridge (strictly dominant, SPD)."""
    edges = [(i, j, float(rng.uniform(0.1, 3))) for i, j in random_graph_edges(rng, n, p)]
    d = [1.0 + float(rng.uniform(0, 1)) for _ in range(n)]
    return graph_to_laplacian(WeightedGraph(n, edges, d))
