import numpy as np
import pytest
from hypothesis import given, strategies as st

from supportlab.sparse import (
    InvalidSpecError,
    MatrixMarketError,
    MeshSpec,
    Permutation,
    SymSparseMatrix,
    arrow_matrix,
    matvec,
    mesh_laplacian,
    permute_sym,
    read_matrix_market,
    write_matrix_market,
)
from tests.helpers import random_spd


def dense_mesh(nx, ny, nz=1):
    """Independent dense construction by coordinate adjacency."""
    n = nx * ny * nz
    pts = [(x, y, z) for z in range(nz) for y in range(ny) for x in range(nx)]
    D = np.zeros((n, n))
    for a, p in enumerate(pts):
        for b, q in enumerate(pts):
            if sum(abs(u - v) for u, v in zip(p, q)) == 1:
                D[a, b] = -1
    D[np.diag_indices(n)] = -D.sum(axis=1)
    D[0, 0] += 1
    return D


class TestMesh:
    def test_small_cases(self):
        assert mesh_laplacian((1, 1)).to_dense().tolist() == [[1.0]]
        assert mesh_laplacian((2, 1)).to_dense().tolist() == [[2.0, -1.0], [-1.0, 1.0]]

    def test_zero_extent_rejected(self):
        with pytest.raises(InvalidSpecError):
            mesh_laplacian((0, 3))
        with pytest.raises(InvalidSpecError):
            MeshSpec((3,))

    @given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 3))
    def test_row_sums_exact(self, nx, ny, nz):
        dims = (nx, ny) if nz == 1 else (nx, ny, nz)
        A = mesh_laplacian(dims)
        sums = A.to_dense().sum(axis=1)
        assert sums[0] == 1 and np.all(sums[1:] == 0)

    @given(st.integers(1, 7), st.integers(1, 7))
    def test_edge_count(self, nx, ny):
        A = mesh_laplacian((nx, ny))
        assert A.nnz_lower - A.n == ny * (nx - 1) + nx * (ny - 1)

    @pytest.mark.parametrize("dims", [(4, 3), (3, 4, 2), (5, 1), (2, 2, 2)])
    def test_matches_coordinate_oracle(self, dims):
        assert np.array_equal(mesh_laplacian(dims).to_dense(), dense_mesh(*dims))

    def test_positive_definite(self):
        assert np.linalg.eigvalsh(mesh_laplacian((4, 3)).to_dense())[0] > 0

    def test_numbering(self):
        spec = MeshSpec((4, 3, 2))
        assert spec.index(1, 0, 0) == 1 and spec.index(0, 1, 0) == 4 and spec.index(0, 0, 1) == 12
        assert all(spec.index(*spec.coords(v)) == v for v in range(spec.n))


class TestStorage:
    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            SymSparseMatrix(2, [0, 2, 2], [1, 0], [1.0, 1.0])  # unsorted rows
        with pytest.raises(ValueError):
            SymSparseMatrix(2, [0, 1, 2], [0, 1], [0.0, 1.0])  # stored zero
        with pytest.raises(ValueError):
            SymSparseMatrix(2, [0, 1, 2], [0, 1], [np.inf, 1.0])

    def test_immutable(self):
        A = mesh_laplacian((3, 3))
        with pytest.raises(ValueError):
            A.vals[0] = 5.0

    def test_from_dense_rejects_unsymmetric(self):
        with pytest.raises(ValueError):
            SymSparseMatrix.from_dense([[1, 2], [3, 1]])

    def test_get_and_nnz(self):
        A = SymSparseMatrix.from_dense([[2, -1, 0], [-1, 2, 0], [0, 0, 5]])
        assert A.get(0, 1) == A.get(1, 0) == -1 and A.get(0, 2) == 0
        assert A.nnz == 5 and A.nnz_lower == 4


class TestPermutation:
    def test_validation(self):
        with pytest.raises(ValueError):
            Permutation([0, 0, 1])
        with pytest.raises(ValueError):
            Permutation([0, 3])

    def test_arrow_reversal(self):
        n = 6
        R = permute_sym(arrow_matrix(n), Permutation.reversal(n)).to_dense()
        expected = np.eye(n)
        expected[-1, -1] = n + 1
        expected[-1, :-1] = expected[:-1, -1] = -1
        assert np.array_equal(R, expected)

    def test_identity(self):
        A = mesh_laplacian((3, 4))
        assert permute_sym(A, Permutation.identity(A.n)) == A

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            permute_sym(mesh_laplacian((2, 2)), Permutation.identity(3))

    @given(st.integers(1, 12), st.integers(0, 2**32 - 1))
    def test_roundtrip_and_dense_oracle(self, n, seed):
        rng = np.random.default_rng(seed)
        A = random_spd(rng, n)
        P = Permutation(rng.permutation(n))
        B = permute_sym(A, P)
        M = np.eye(n)[P.perm]  # row k of M is e_{perm[k]}
        assert np.array_equal(B.to_dense(), M @ A.to_dense() @ M.T)
        assert permute_sym(B, P.inverse()) == A
        ev = np.linalg.eigvalsh
        assert np.allclose(ev(A.to_dense()), ev(B.to_dense()), atol=1e-10, rtol=0)


class TestMatvec:
    def test_examples(self):
        assert matvec(mesh_laplacian((2, 1)), [1, 1]).tolist() == [1.0, 0.0]
        assert not np.any(matvec(mesh_laplacian((3, 3)), np.zeros(9)))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            matvec(mesh_laplacian((2, 2)), np.ones(3))

    @given(st.integers(1, 50), st.integers(0, 2**32 - 1))
    def test_dense_oracle(self, n, seed):
        rng = np.random.default_rng(seed)
        A = random_spd(rng, n)
        x = rng.standard_normal(n)
        D = np.zeros((n, n))
        for i, j, v in A.entries():
            D[i, j] = D[j, i] = v
        ref = D @ x
        assert np.linalg.norm(matvec(A, x) - ref) <= 1e-14 * max(1.0, np.linalg.norm(ref)) * n


class TestMatrixMarket:
    CANON = "%%MatrixMarket matrix coordinate real symmetric\n3 3 4\n1 1 2\n2 1 -1\n2 2 2\n3 3 1.5\n"

    def test_roundtrip_text(self):
        assert write_matrix_market(read_matrix_market(self.CANON)) == self.CANON

    def test_comments_and_blank_lines(self):
        text = self.CANON.replace("3 3 4\n", "% a comment\n\n3 3 4\n")
        assert read_matrix_market(text) == read_matrix_market(self.CANON)

    def test_mesh_roundtrip(self):
        A = mesh_laplacian((4, 3))
        B = read_matrix_market(write_matrix_market(A))
        assert np.array_equal(A.to_dense(), B.to_dense())

    @pytest.mark.parametrize(
        "text",
        [
            "%%MatrixMarket matrix coordinate real symmetric\n5 5 1\n2 5 1.0\n",
            "%%MatrixMarket matrix array real symmetric\n2 2 1\n1 1 1\n",
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1\n",
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1\n",
            "not a header\n",
        ],
    )
    def test_errors(self, text):
        with pytest.raises(MatrixMarketError):
            read_matrix_market(text)
