import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from supportlab.cholesky import sparse_cholesky
from supportlab.graph import WeightedGraph, graph_to_laplacian
from supportlab.ordering import (
    CliqueCover,
    GridBisector,
    NotAForestError,
    PatternGraph,
    SeparatorError,
    eliminate_vertex,
    fill_graph,
    fill_path_oracle,
    lrt_order,
    mesh_pattern,
    minimum_degree,
    minimum_degree_trace,
    nd_mesh,
    symbolic_elimination,
    symbolic_fill,
    symbolic_flops,
    tree_postorder,
)
from supportlab.sparse import Permutation, arrow_matrix, mesh_laplacian, permute_sym
from tests.helpers import random_graph_edges


def random_pattern(seed, n, p=0.3):
    rng = np.random.default_rng(seed)
    return PatternGraph.from_edges(n, random_graph_edges(rng, n, p))


def numeric_fill(G):
    """Fill of a factorization with random weights on the pattern of ``G``."""
    rng = np.random.default_rng(1)
    W = WeightedGraph(G.n, [(u, v, float(rng.uniform(0.5, 2))) for u, v in sorted(G.edges())],
                      [1.0] * G.n)
    return sparse_cholesky(graph_to_laplacian(W)).fill


class TestFill:
    def test_triangle_fill_characterizations_agree(self):
        # path 0 - 2 - 1: eliminating 0 creates nothing, a lower vertex in the middle does
        G = PatternGraph.from_edges(3, [(0, 2), (1, 2)])
        assert fill_graph(G) == G
        H = PatternGraph.from_edges(3, [(0, 1), (0, 2)])
        assert fill_graph(H).edges() == {(0, 1), (0, 2), (1, 2)}
        assert fill_path_oracle(H, 1, 2) and not fill_path_oracle(G, 0, 1)

    def test_eliminate_vertex(self):
        G = PatternGraph.from_edges(4, [(0, 1), (0, 3), (1, 2)])
        assert eliminate_vertex(G, 0).edges() == {(0, 1), (0, 3), (1, 2), (1, 3)}

    def test_arrow(self):
        n = 8
        G = PatternGraph.from_matrix(arrow_matrix(n))
        assert symbolic_fill(G) == n * (n + 1) // 2
        R = G.permuted(Permutation.reversal(n))
        assert fill_graph(R) == R and symbolic_fill(R) == 2 * n - 1

    @given(st.integers(2, 12), st.integers(0, 2**32 - 1))
    def test_path_oracle_matches_elimination(self, n, seed):
        G = random_pattern(seed, n)
        plus = fill_graph(G)
        for i in range(n):
            for j in range(i + 1, n):
                assert ((i, j) in plus.edges()) == fill_path_oracle(G, i, j)

    @given(st.integers(1, 25), st.integers(0, 2**32 - 1))
    def test_symbolic_matches_fill_graph_and_numeric(self, n, seed):
        G = random_pattern(seed, n)
        cols, _ = symbolic_elimination(G)
        plus = fill_graph(G)
        for j, c in enumerate(cols):
            assert c == [j] + [u for u in plus.adj[j] if u > j]
        assert symbolic_fill(G) == numeric_fill(G)

    def test_symbolic_flops_match_numeric(self):
        A = mesh_laplacian((6, 6))
        P = nd_mesh((6, 6))
        B = permute_sym(A, P)
        assert symbolic_flops(PatternGraph.from_matrix(B)) == sparse_cholesky(B).flops

    def test_etree(self):
        # path 0 - 1 - 2: each clique is absorbed by the next column
        _, T = symbolic_elimination(PatternGraph.from_edges(3, [(0, 1), (1, 2)]))
        assert T.parent == (1, 2, -1)
        _, T = symbolic_elimination(PatternGraph.from_edges(4, [(0, 3), (1, 3)]))
        assert T.parent == (3, 3, -1, -1)
        assert T.children()[3] == [0, 1]

    def test_clique_cover(self):
        G = PatternGraph.from_edges(4, [(0, 1), (0, 2), (2, 3)])
        cover = CliqueCover(G)
        assert cover.neighbors(0) == {1, 2}
        new, named = cover.eliminate(0)
        assert new == [1, 2] and named == []
        assert cover.neighbors(1) == {2} and cover.neighbors(2) == {1, 3}
        new, named = cover.eliminate(2)
        assert new == [1, 3] and named == [0]


class TestMinimumDegree:
    def test_arrow_hub_last(self):
        P = minimum_degree(PatternGraph.from_matrix(arrow_matrix(7)))
        assert P.perm[-1] == 0 or P.perm[-2] == 0

    def test_tie_breaking(self):
        P = minimum_degree(PatternGraph.from_edges(3, []))
        assert P.perm.tolist() == [0, 1, 2]

    @given(st.integers(1, 25), st.integers(0, 2**32 - 1))
    def test_trace_property(self, n, seed):
        G = random_pattern(seed, n)
        P, trace = minimum_degree_trace(G)
        assert sorted(P.perm.tolist()) == list(range(n))
        assert [v for v, _, _ in trace] == P.perm.tolist()
        for _, d, dmin in trace:
            assert d == dmin
        # degrees in the trace are the true degrees in the partially eliminated graph
        H = G.permuted(P)
        plus = fill_graph(H)
        for k, (_, d, _) in enumerate(trace):
            assert d == sum(1 for u in plus.adj[k] if u > k)

    def test_beats_natural_on_mesh(self):
        A = mesh_laplacian((12, 12))
        P = minimum_degree(PatternGraph.from_matrix(A))
        assert sparse_cholesky(permute_sym(A, P)).fill < sparse_cholesky(A).fill


class TestNestedDissection:
    @pytest.mark.parametrize("dims", [(1, 1), (1, 9), (9, 1), (5, 5), (15, 15), (20, 7), (6, 5, 4)])
    def test_is_permutation(self, dims):
        P = nd_mesh(dims)
        assert sorted(P.perm.tolist()) == list(range(int(np.prod(dims))))

    def test_path_has_no_fill(self):
        A = mesh_laplacian((1, 20))
        F = sparse_cholesky(permute_sym(A, nd_mesh((1, 20))))
        assert F.fill == 2 * 20 - 1

    @pytest.mark.parametrize("dims", [(15, 15), (31, 31), (40, 9), (9, 40), (33, 20)])
    def test_separator_sizes_2d(self, dims):
        seps = []
        nd_mesh(dims, separators=seps)
        assert seps
        for m, s in seps:
            assert s <= 2 * math.sqrt(m) + 1

    def test_separator_last(self):
        seps = []
        P = nd_mesh((15, 15), separators=seps)
        m, s = seps[0]
        assert m == 225
        top = P.perm[-s:]
        assert s == 29 and all(int(v) % 15 == 7 or int(v) // 15 == 7 for v in top)
        assert top.tolist() == sorted(top.tolist())

    def test_structure_matches_fill_graph(self):
        A = mesh_laplacian((10, 10))
        P = nd_mesh((10, 10))
        B = permute_sym(A, P)
        assert sparse_cholesky(B).fill == symbolic_fill(PatternGraph.from_matrix(B))

    def test_better_than_natural(self):
        A = mesh_laplacian((31, 31))
        nat = sparse_cholesky(A)
        nd = sparse_cholesky(permute_sym(A, nd_mesh((31, 31))))
        assert nd.fill < nat.fill and nd.flops < nat.flops / 2


class TestLRT:
    def test_permutation_and_fill(self):
        spec = (15, 15)
        G = mesh_pattern(spec)
        P = lrt_order(G, GridBisector(spec))
        assert sorted(P.perm.tolist()) == list(range(225))
        A = mesh_laplacian(spec)
        lrt = sparse_cholesky(permute_sym(A, P)).fill
        nd = sparse_cholesky(permute_sym(A, nd_mesh(spec))).fill
        assert lrt <= 4 * nd

    def test_small_graph_numbered_directly(self):
        G = mesh_pattern((3, 3))
        assert lrt_order(G, GridBisector((3, 3))).perm.tolist() == list(range(9))

    def test_components_in_order(self):
        G = PatternGraph.from_edges(4, [(0, 2), (1, 3)])
        sep = GridBisector((2, 2))
        P = lrt_order(G, sep)
        assert P.perm.tolist() == [0, 2, 1, 3]

    def test_bad_separator_rejected(self):
        G = mesh_pattern((5, 5))

        def crossing(G, W):
            W = sorted(W)
            return set(), set(W[: len(W) // 2]), set(W[len(W) // 2:])

        crossing.alpha, crossing.beta = 0.5, 2.0
        with pytest.raises(SeparatorError):
            lrt_order(G, crossing)

        def stuck(G, W):
            return set(W), set(), set()

        stuck.alpha, stuck.beta = 0.5, 2.0
        with pytest.raises(SeparatorError):
            lrt_order(G, stuck)

    @pytest.mark.parametrize("dims", [(12, 9), (4, 4, 4)])
    def test_separator_vertices_after_sides(self, dims):
        G = mesh_pattern(dims)
        P = lrt_order(G, GridBisector(dims))
        A = permute_sym(mesh_laplacian(dims), P)
        sparse_cholesky(A)  # positive definite in any order
        assert sorted(P.perm.tolist()) == list(range(G.n))


class TestTreePostorder:
    def test_star_zero_fill(self):
        G = PatternGraph.from_edges(6, [(0, k) for k in range(1, 6)])
        P = tree_postorder(G)
        assert P.perm.tolist() == [1, 2, 3, 4, 0, 5]
        H = G.permuted(P)
        assert fill_graph(H) == H

    @given(st.integers(1, 30), st.integers(0, 2**32 - 1))
    def test_forest_has_no_fill(self, n, seed):
        rng = np.random.default_rng(seed)
        edges = [(int(rng.integers(0, k)), k) for k in range(1, n) if rng.random() < 0.8]
        G = PatternGraph.from_edges(n, edges)
        H = G.permuted(tree_postorder(G))
        assert fill_graph(H) == H

    def test_cycle_rejected(self):
        with pytest.raises(NotAForestError):
            tree_postorder(PatternGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)]))
