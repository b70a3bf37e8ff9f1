"""MINRES, split-preconditioned MINRES, and the Krylov-Chebyshev solver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from .cholesky import CholFactor
from .sparse import Permutation, SymSparseMatrix


def as_operator(A) -> LinearOperator:
    """Wrap a matrix, sparse matrix, :class:`SymSparseMatrix` or operator as a ``LinearOperator``."""
    if isinstance(A, SymSparseMatrix):
        return aslinearoperator(A.to_scipy())
    if isinstance(A, LinearOperator):
        return A
    if sp.issparse(A) or isinstance(A, np.ndarray):
        return aslinearoperator(A)
    return aslinearoperator(np.asarray(A, dtype=np.float64))


@dataclass
class SolveReport:
    """Outcome of an iterative solve.

    ``residual_history[t]`` is the relative residual of the system the Krylov
    method iterates on, as tracked by the method itself (index 0 is the initial
    guess). ``true_residual_history[t]`` is ``||b - A x_t|| / ||b||`` recomputed
    explicitly for the original system.
    """

    iterations: int = 0
    residual_history: list[float] = field(default_factory=list)
    true_residual_history: list[float] = field(default_factory=list)
    converged: bool = False
    matvecs: int = 0
    precond_applies: int = 0

    @property
    def final_residual(self) -> float:
        return self.true_residual_history[-1] if self.true_residual_history else float("nan")


def _givens(a: float, b: float) -> tuple[float, float, float]:
    rho = math.hypot(a, b)
    if rho == 0.0:
        return 1.0, 0.0, 0.0
    return a / rho, b / rho, rho


def _minres(apply, b, tol, max_iter, check, report: SolveReport):
    """Lanczos tridiagonalization plus a running QR by Givens rotations.

    ``apply`` multiplies by the (symmetric) iteration matrix; ``check(x)``
    returns the explicit relative residual of that system for the current
    iterate and is used to confirm convergence.
    """
    n = b.shape[0]
    x = np.zeros(n)
    beta0 = float(np.linalg.norm(b))
    report.residual_history.append(1.0)
    if beta0 == 0.0:
        report.converged = True
        return x

    q_prev = np.zeros(n)
    q = b / beta0
    beta_prev = 0.0
    c1, s1 = 1.0, 0.0  # rotation t-1
    c2, s2 = 1.0, 0.0  # rotation t-2
    m1 = np.zeros(n)
    m2 = np.zeros(n)
    w = beta0  # current entry of the rotated right-hand side

    for t in range(1, max_iter + 1):
        v = apply(q)
        report.matvecs += 1
        alpha = float(q @ v)
        v -= alpha * q + beta_prev * q_prev
        beta = float(np.linalg.norm(v))

        # column t of the tridiagonal matrix holds (beta_prev, alpha, beta)
        u_tm2 = s2 * beta_prev
        h = c2 * beta_prev
        u_tm1 = c1 * h + s1 * alpha
        gamma = -s1 * h + c1 * alpha
        c, s, u_tt = _givens(gamma, beta)
        if u_tt == 0.0:
            break

        m = (q - u_tm1 * m1 - u_tm2 * m2) / u_tt
        x = x + (c * w) * m
        w = -s * w

        report.iterations = t
        report.residual_history.append(abs(w) / beta0)
        res = check(x)
        if res <= tol or beta == 0.0:
            report.converged = res <= tol
            break

        q_prev, q = q, v / beta
        beta_prev = beta
        c2, s2, c1, s1 = c1, s1, c, s
        m2, m1 = m1, m
    return x


def minres(A, b, tol: float = 1e-6, max_iter: int | None = None) -> tuple[np.ndarray, SolveReport]:
    """Minimum-residual iteration for a symmetric (possibly indefinite) operator.

    Returns the first iterate whose explicit relative residual is at most ``tol``,
    or the last iterate with ``converged=False`` after ``max_iter`` steps.
    """
    op = as_operator(A)
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (op.shape[0],):
        raise ValueError("right-hand side length does not match operator size")
    if tol <= 0:
        raise ValueError("tol must be positive")
    max_iter = 10 * len(b) if max_iter is None else int(max_iter)
    nb = float(np.linalg.norm(b))
    report = SolveReport(true_residual_history=[1.0 if nb > 0 else 0.0])

    def check(x):
        res = float(np.linalg.norm(b - op.matvec(x))) / nb
        report.true_residual_history.append(res)
        return res

    x = _minres(op.matvec, b, tol, max_iter, check, report)
    return x, report


class SplitPreconditioner:
    """Applies ``C^{-1}`` and ``C^{-T}`` where ``B = C C^T`` and ``C = P^T L``.

    ``L`` factors the reordered matrix ``P B P^T``.
    """

    def __init__(self, factor: CholFactor, order: Permutation | None = None):
        self.factor = factor
        self.order = order if order is not None else Permutation.identity(factor.n)
        self.applies = 0

    def solve_lower(self, v):
        self.applies += 1
        return self.factor.forward_solve(self.order.apply(v))

    def solve_upper(self, y):
        self.applies += 1
        return self.order.unapply(self.factor.backward_solve(y))


def minres_precond_split(A, L: CholFactor, b, tol: float = 1e-6, max_iter: int | None = None,
                         order: Permutation | None = None) -> tuple[np.ndarray, SolveReport]:
    """MINRES on ``L^{-1} A L^{-T} y = L^{-1} b`` followed by ``L^T x = y``.

    ``order`` is the permutation under which ``L`` was computed (``P B P^T = L L^T``).
    ``residual_history`` and the stopping test refer to the preconditioned system;
    ``true_residual_history`` holds ``||b - A x_t|| / ||b||``.
    """
    op = as_operator(A)
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (op.shape[0],) or L.n != len(b):
        raise ValueError("sizes of A, L and b do not match")
    if tol <= 0:
        raise ValueError("tol must be positive")
    max_iter = 10 * len(b) if max_iter is None else int(max_iter)
    C = SplitPreconditioner(L, order)
    c = C.solve_lower(b)
    nc = float(np.linalg.norm(c))
    nb = float(np.linalg.norm(b))
    report = SolveReport(true_residual_history=[1.0 if nb > 0 else 0.0])

    def apply(y):
        return C.solve_lower(op.matvec(C.solve_upper(y)))

    def check(y):
        r = b - op.matvec(C.solve_upper(y))
        report.true_residual_history.append(float(np.linalg.norm(r)) / nb)
        return float(np.linalg.norm(C.solve_lower(r))) / nc

    y = _minres(apply, c, tol, max_iter, check, report)
    report.precond_applies = C.applies
    return C.solve_upper(y), report


# Chebyshev ----------------------------------------------------------------------


@dataclass(frozen=True)
class ChebyParams:
    rho_min: float
    rho_max: float

    def __post_init__(self):
        if not (self.rho_min > 0):
            raise ValueError("rho_min must be positive")
        if self.rho_max < self.rho_min:
            raise ValueError("rho_max must be at least rho_min")


def chebyshev_solve(A, b, p: ChebyParams, t_max: int, tol: float = 0.0) -> tuple[np.ndarray, SolveReport]:
    """Krylov-Chebyshev iteration: ``r_t = p_t(A) b`` with the shifted, scaled Chebyshev polynomial.

    With ``z = rho_plus / rho_minus`` and ``a_t = c_{t-1}(z) / c_t(z)`` (so that
    ``a_t = 1 / (2z - a_{t-1})``), the three-term updates are normalized by
    ``c_t(z)`` to avoid overflow of the Chebyshev values.
    """
    op = as_operator(A)
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (op.shape[0],):
        raise ValueError("right-hand side length does not match operator size")
    nb = float(np.linalg.norm(b))
    report = SolveReport(residual_history=[1.0], true_residual_history=[1.0])
    x = np.zeros_like(b)
    if nb == 0.0:
        report.converged = True
        return x, report

    def record(x, r):
        rel = float(np.linalg.norm(r)) / nb
        report.residual_history.append(rel)
        report.true_residual_history.append(float(np.linalg.norm(b - op.matvec(x))) / nb)
        return rel

    rp = p.rho_max + p.rho_min
    rm = p.rho_max - p.rho_min
    if rm == 0.0:
        # single eigenvalue interval: one Richardson step solves exactly
        x = b / p.rho_min
        r = b - op.matvec(x)
        report.matvecs += 1
        report.iterations = 1
        report.converged = record(x, r) <= max(tol, 1e-14)
        return x, report
    if t_max < 1:
        return x, report

    z = rp / rm
    x_prev, r_prev = x, b.copy()
    x = (2.0 / rp) * b
    Ab = op.matvec(b)
    report.matvecs += 1
    r = b - (2.0 / rp) * Ab
    report.iterations = 1
    a = 1.0 / z  # c_0 / c_1
    if record(x, r) <= tol:
        report.converged = True
        return x, report
    for t in range(2, t_max + 1):
        a_new = 1.0 / (2.0 * z - a)  # c_{t-1} / c_t
        ratio2 = a_new * a  # c_{t-2} / c_t
        Ar = op.matvec(r)
        report.matvecs += 1
        r_next = a_new * (2.0 * z * r - (4.0 / rm) * Ar) - ratio2 * r_prev
        x_next = a_new * (2.0 * z * x + (4.0 / rm) * r) - ratio2 * x_prev
        x_prev, x = x, x_next
        r_prev, r = r, r_next
        a = a_new
        report.iterations = t
        if record(x, r) <= tol:
            report.converged = True
            break
    return x, report


def cheby_bound(kappa: float, t: int) -> tuple[float, float]:
    """Tight and loose residual-reduction bounds ``(2/(s^t + s^-t), 2 s^-t)``, ``s = (sqrt(k)+1)/(sqrt(k)-1)``."""
    if kappa < 1:
        raise ValueError("kappa must be at least 1")
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 1.0, 2.0
    if kappa == 1:
        return 0.0, 0.0
    sk = math.sqrt(kappa)
    # work with the inverse ratio to stay finite for large t
    q = (sk - 1.0) / (sk + 1.0)
    qt = q ** t
    return 2.0 * qt / (1.0 + qt * qt), 2.0 * qt


def iterations_to_tol(kappa: float, tol: float) -> int:
    """Smallest ``t`` whose loose Chebyshev bound is at most ``tol``."""
    if kappa < 1:
        raise ValueError("kappa must be at least 1")
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    if kappa == 1:
        return 1
    sk = math.sqrt(kappa)
    q = (sk - 1.0) / (sk + 1.0)
    t = max(1, math.ceil(math.log(tol / 2.0) / math.log(q)))
    while t > 1 and cheby_bound(kappa, t - 1)[1] <= tol:
        t -= 1
    while cheby_bound(kappa, t)[1] > tol:
        t += 1
    return t
