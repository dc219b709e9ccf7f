"""Closed-form solver for equality-constrained quadratic programs.

    minimize  0.5 * x^T Q x   subject to  A x = b

With Q symmetric positive definite and A of full row rank s < n the unique
minimizer is x* = Q^-1 A^T (A Q^-1 A^T)^-1 b.  Every Q^-1 application here is
a Cholesky solve; no inverse is ever formed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import DomainError, NotPositiveDefiniteError, RankDeficientError

PIVOT_RTOL = 1e-12
SYMMETRY_RTOL = 1e-12
KKT_TOL = 1e-8


def _check_symmetric(Q: np.ndarray) -> None:
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {Q.shape}")
    scale = np.max(np.abs(Q)) if Q.size else 0.0
    if np.max(np.abs(Q - Q.T), initial=0.0) > SYMMETRY_RTOL * max(scale, 1e-300):
        raise DomainError("matrix is not symmetric")


def cholesky(Q, pivot_rtol: float = PIVOT_RTOL) -> np.ndarray | None:
    """Lower Cholesky factor of Q, or None when Q is not (numerically) PD.

    A pivot counts as positive only when it exceeds ``pivot_rtol * max|Q_ij|``.
    """
    Q = np.asarray(Q, dtype=float)
    _check_symmetric(Q)
    scale = np.max(np.abs(Q)) if Q.size else 0.0
    if scale == 0.0 or not np.all(np.isfinite(Q)):
        return None
    try:
        L = np.linalg.cholesky(Q)
    except np.linalg.LinAlgError:
        return None
    if np.min(np.diag(L)) ** 2 <= pivot_rtol * scale:
        return None
    return L


def is_positive_definite(Q) -> bool:
    return cholesky(Q) is not None


class CholeskySolver:
    """Reusable factorization of an SPD matrix."""

    def __init__(self, Q, what: str = "matrix"):
        L = cholesky(Q)
        if L is None:
            raise NotPositiveDefiniteError(f"{what} is not positive definite")
        self.L = L
        self.L.setflags(write=False)

    def solve(self, rhs) -> np.ndarray:
        y = sla.solve_triangular(self.L, rhs, lower=True)
        return sla.solve_triangular(self.L.T, y, lower=False)


@dataclass(frozen=True, eq=False)
class EqQpProblem:
    Q: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        A = np.atleast_2d(np.array(self.A, dtype=float))
        b = np.atleast_1d(np.array(self.b, dtype=float)).ravel()
        _check_symmetric(Q)
        n = Q.shape[0]
        s = A.shape[0]
        if A.shape[1] != n:
            raise DomainError(f"A has {A.shape[1]} columns, Q is {n}x{n}")
        if b.size != s:
            raise DomainError(f"b has {b.size} entries, A has {s} rows")
        if not s < n:
            raise DomainError(f"need fewer constraints than variables (s={s}, n={n})")
        for arr in (Q, A, b):
            arr.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ self.Q @ x)


@dataclass(frozen=True, eq=False)
class EqQpSolution:
    x_star: np.ndarray
    lam: np.ndarray
    objective: float
    constraint_residual: float
    stationarity_residual: float


def solve_eq_qp(problem: EqQpProblem, q_solver: CholeskySolver | None = None) -> EqQpSolution:
    """Minimize 0.5 x^T Q x subject to A x = b in closed form.

    Parameters
    ----------
    problem : EqQpProblem
    q_solver : CholeskySolver, optional
        A factorization of ``problem.Q`` to reuse.

    Raises
    ------
    NotPositiveDefiniteError
        Q fails the Cholesky pivot test.
    RankDeficientError
        A Q^-1 A^T is singular, i.e. A does not have full row rank.
    """
    Q, A, b = problem.Q, problem.A, problem.b
    qs = q_solver if q_solver is not None else CholeskySolver(Q, "Q")
    QinvAt = qs.solve(A.T)
    S = A @ QinvAt
    S = 0.5 * (S + S.T)
    try:
        ss = CholeskySolver(S, "A Q^-1 A^T")
    except NotPositiveDefiniteError:
        raise RankDeficientError("constraint matrix A is rank deficient") from None
    lam = ss.solve(b)
    x = QinvAt @ lam
    feas = float(np.max(np.abs(A @ x - b)))
    stat = float(np.max(np.abs(Q @ x - A.T @ lam)))
    scale = 1.0 + float(np.max(np.abs(b)))
    # tolerance scaled by the problem data; a miss means conditioning is hopeless
    if feas > KKT_TOL * scale:
        raise RankDeficientError(f"constraints violated by {feas:.3e} (ill-conditioned system)")
    x.setflags(write=False)
    lam.setflags(write=False)
    return EqQpSolution(x, lam, problem.objective(x), feas, stat)
