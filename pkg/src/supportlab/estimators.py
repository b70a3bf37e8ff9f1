"""Thin scikit-learn style wrappers: ``fit`` takes the coefficient matrix, ``predict`` a right-hand side."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .cholesky import sparse_cholesky
from .krylov import ChebyParams, chebyshev_solve, minres, minres_precond_split
from .ordering import PatternGraph, minimum_degree, nd_mesh, tree_postorder
from .precond import build_precond, parse_precond_spec, support_graph
from .sparse import MeshSpec, Permutation, permute_sym
from .validation import check_sym_sparse, check_vector


def _mesh(mesh):
    if mesh is None or isinstance(mesh, MeshSpec):
        return mesh
    if isinstance(mesh, str):
        return MeshSpec.parse(mesh)
    return MeshSpec(tuple(mesh))


def make_ordering(name: str, A, mesh=None) -> Permutation:
    """Permutation for ``natural``, ``nd`` (meshes only), ``md`` or ``tree``."""
    if name == "natural":
        return Permutation.identity(A.n)
    if name == "nd":
        spec = _mesh(mesh)
        if spec is None or spec.n != A.n:
            raise ValueError("nested dissection needs the mesh the matrix was built on")
        return nd_mesh(spec)
    if name == "md":
        return minimum_degree(PatternGraph.from_matrix(A))
    if name == "tree":
        return tree_postorder(PatternGraph.from_matrix(A))
    raise ValueError(f"unknown ordering {name!r}")


class _Fitted:
    _fitted_attr = "n_features_in_"

    def _check_fitted(self):
        if not hasattr(self, self._fitted_attr):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet; call fit(A) first")


class DirectSolver(_Fitted, BaseEstimator):
    """Sparse Cholesky solve under a fill-reducing ordering."""

    def __init__(self, ordering: str = "natural", mesh=None):
        self.ordering = ordering
        self.mesh = mesh

    def fit(self, A, y=None):
        A = check_sym_sparse(A)
        self.order_ = make_ordering(self.ordering, A, self.mesh)
        self.factor_ = sparse_cholesky(permute_sym(A, self.order_))
        self.n_features_in_ = A.n
        return self

    def predict(self, b):
        self._check_fitted()
        b = check_vector(b, self.n_features_in_)
        return self.order_.unapply(self.factor_.solve(self.order_.apply(b)))


class MinresSolver(_Fitted, BaseEstimator):
    """MINRES, optionally split-preconditioned by a support preconditioner.

    ``preconditioner`` is ``"none"``, ``"msf"``, ``"joshi:K"`` or ``"vaidya:T"``;
    Joshi preconditioners need ``mesh``. The last solve's report is kept in ``report_``.
    """

    def __init__(self, tol: float = 1e-6, max_iter: int | None = None, preconditioner: str = "none", mesh=None):
        self.tol = tol
        self.max_iter = max_iter
        self.preconditioner = preconditioner
        self.mesh = mesh

    def fit(self, A, y=None):
        A = check_sym_sparse(A)
        kind, param = parse_precond_spec(self.preconditioner)
        self.A_ = A
        self.precond_ = None
        if kind != "none":
            self.precond_ = build_precond(support_graph(kind, param, A, _mesh(self.mesh)), A)
        self.n_features_in_ = A.n
        return self

    def predict(self, b):
        self._check_fitted()
        b = check_vector(b, self.n_features_in_)
        if self.precond_ is None:
            x, self.report_ = minres(self.A_, b, self.tol, self.max_iter)
        else:
            P = self.precond_
            x, self.report_ = minres_precond_split(self.A_, P.factor, b, self.tol, self.max_iter, order=P.order)
        return x


class ChebyshevSolver(_Fitted, BaseEstimator):
    """Krylov-Chebyshev iteration on a known eigenvalue interval.

    When ``rho_min``/``rho_max`` are ``None`` the extreme eigenvalues of the
    fitted matrix are used (dense computation, small matrices only).
    """

    def __init__(self, rho_min: float | None = None, rho_max: float | None = None, t_max: int = 100, tol: float = 0.0):
        self.rho_min = rho_min
        self.rho_max = rho_max
        self.t_max = t_max
        self.tol = tol

    def fit(self, A, y=None):
        A = check_sym_sparse(A)
        lo, hi = self.rho_min, self.rho_max
        if lo is None or hi is None:
            ev = np.linalg.eigvalsh(A.to_dense())
            lo = ev[0] if lo is None else lo
            hi = ev[-1] if hi is None else hi
        self.params_ = ChebyParams(float(lo), float(hi))
        self.A_ = A
        self.n_features_in_ = A.n
        return self

    def predict(self, b):
        self._check_fitted()
        b = check_vector(b, self.n_features_in_)
        x, self.report_ = chebyshev_solve(self.A_, b, self.params_, self.t_max, self.tol)
        return x


class SupportPreconditioner(_Fitted, TransformerMixin, BaseEstimator):
    """``fit`` builds and factors ``B``; ``transform`` applies ``B^{-1}`` to vectors (rows of a 2-D input)."""

    def __init__(self, kind: str = "msf", mesh=None):
        self.kind = kind
        self.mesh = mesh

    def fit(self, A, y=None):
        A = check_sym_sparse(A)
        kind, param = parse_precond_spec(self.kind)
        if kind == "none":
            raise ValueError("SupportPreconditioner needs a preconditioner kind other than 'none'")
        self.precond_ = build_precond(support_graph(kind, param, A, _mesh(self.mesh)), A)
        self.n_features_in_ = A.n
        return self

    def transform(self, R):
        self._check_fitted()
        R = np.asarray(R, dtype=np.float64)
        if R.ndim == 1:
            return self.precond_.solve(check_vector(R, self.n_features_in_, name="r"))
        if R.ndim != 2 or R.shape[1] != self.n_features_in_:
            raise ValueError(f"expected vectors of length {self.n_features_in_}")
        return np.vstack([self.precond_.solve(r) for r in R])
