import numpy as np
import pytest
import scipy.sparse as sp
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from supportlab.estimators import (
    ChebyshevSolver,
    DirectSolver,
    MinresSolver,
    SupportPreconditioner,
    make_ordering,
)
from supportlab.sparse import mesh_laplacian
from supportlab.validation import check_sym_sparse, check_vector


@pytest.fixture
def system(rng):
    A = mesh_laplacian((8, 8))
    x = rng.random(64)
    return A, x, A.to_dense() @ x


class TestValidation:
    def test_inputs(self):
        D = mesh_laplacian((3, 3)).to_dense()
        assert check_sym_sparse(D) == check_sym_sparse(sp.csr_matrix(D))
        with pytest.raises(ValueError):
            check_sym_sparse(np.ones((2, 3)))
        with pytest.raises(ValueError):
            check_sym_sparse([[1.0, np.nan], [np.nan, 1.0]])
        with pytest.raises(ValueError):
            check_vector(np.ones((2, 2)))
        with pytest.raises(ValueError):
            check_vector([1.0, np.inf])
        with pytest.raises(ValueError):
            check_vector([1.0], 2)


class TestSolvers:
    @pytest.mark.parametrize("ordering", ["natural", "nd", "md"])
    def test_direct(self, system, ordering):
        A, x, b = system
        est = DirectSolver(ordering=ordering, mesh=(8, 8)).fit(A)
        assert np.allclose(est.predict(b), x, atol=1e-10)

    def test_minres_variants(self, system):
        A, x, b = system
        for pc in ("none", "msf", "joshi:2", "vaidya:4"):
            est = MinresSolver(tol=1e-10, preconditioner=pc, mesh="8,8").fit(A)
            got = est.predict(b)
            assert est.report_.converged
            assert np.linalg.norm(A.to_dense() @ got - b) <= 1e-9 * np.linalg.norm(b)

    def test_chebyshev(self, system):
        A, x, b = system
        est = ChebyshevSolver(t_max=2000, tol=1e-10).fit(A)
        assert np.allclose(est.predict(b), x, atol=1e-6)

    def test_support_transform(self, system, rng):
        A, _, _ = system
        est = SupportPreconditioner("msf").fit(A)
        R = rng.random((3, 64))
        Y = est.transform(R)
        B = est.precond_.B.to_dense()
        assert np.allclose(B @ Y.T, R.T)
        assert np.allclose(est.transform(R[0]), Y[0])
        with pytest.raises(ValueError):
            SupportPreconditioner("none").fit(A)

    def test_not_fitted_and_clone(self):
        with pytest.raises(NotFittedError):
            DirectSolver().predict(np.ones(3))
        est = MinresSolver(tol=1e-3, preconditioner="msf")
        assert clone(est).get_params() == est.get_params()

    def test_make_ordering_errors(self):
        A = mesh_laplacian((3, 3))
        with pytest.raises(ValueError):
            make_ordering("nd", A)
        with pytest.raises(ValueError):
            make_ordering("rcm", A)
