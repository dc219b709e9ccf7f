"""Portfolio return/risk and the closed-form mean-variance frontier.

Short positions and leverage are allowed: the only constraints on an
allocation are ``sum(x) == 1`` and, on the frontier, ``M @ x == r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateUniverseError, DomainError, NotPositiveDefiniteError
from .qp import CholeskySolver, EqQpProblem, solve_eq_qp
from .stats import CovarianceModel, ReturnMatrix

WEIGHT_SUM_TOL = 1e-10
COLLINEAR_RTOL = 1e-12
NEGATIVE_VARIANCE_TOL = 1e-12
GRID_POINTS = 200


@dataclass(frozen=True, eq=False)
class Allocation:
    assets: tuple[str, ...]
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).ravel()
        if w.size != len(self.assets):
            raise DomainError(f"{w.size} weights for {len(self.assets)} assets")
        # heavy leverage carries rounding proportional to the gross exposure
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL * max(1.0, float(np.abs(w).sum())):
            raise DomainError(f"weights sum to {w.sum()!r}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "assets", tuple(self.assets))
        object.__setattr__(self, "weights", w)

    @classmethod
    def equal(cls, assets: Sequence[str]) -> Allocation:
        n = len(assets)
        return cls(tuple(assets), np.full(n, 1.0 / n))

    def as_percent(self) -> np.ndarray:
        return 100.0 * self.weights


@dataclass(frozen=True, eq=False)
class FrontierModel:
    """Frontier constants a = M'V^-1 e, b = M'V^-1 M, c = e'V^-1 e, delta = bc - a^2.

    Build with :func:`frontier_constants`.  The Cholesky factor of V is
    computed once and reused by every method.
    """

    assets: tuple[str, ...]
    M: np.ndarray
    V: CovarianceModel
    a: float
    b: float
    c: float
    delta: float
    _solver: CholeskySolver = field(repr=False)
    _Vinv_M: np.ndarray = field(repr=False)
    _Vinv_e: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.M.size


@dataclass(frozen=True, eq=False)
class MinRiskPortfolio:
    allocation: Allocation
    expected_return: float
    risk: float


def _weights(x) -> np.ndarray:
    return x.weights if isinstance(x, Allocation) else np.asarray(x, dtype=float).ravel()


def portfolio_return_series(R: ReturnMatrix, x: Allocation) -> np.ndarray:
    """Per-period portfolio return r_ix = sum_j x_j r_ij."""
    if isinstance(x, Allocation) and x.assets != R.assets:
        raise DomainError(f"allocation assets {x.assets} do not match {R.assets}")
    w = _weights(x)
    if w.size != R.shape[1]:
        raise DomainError(f"{w.size} weights for {R.shape[1]} assets")
    return R.returns @ w


def portfolio_mean(M, x) -> float:
    M = np.asarray(M, dtype=float).ravel()
    w = _weights(x)
    if M.size != w.size:
        raise DomainError(f"length mismatch: {M.size} means, {w.size} weights")
    return float(M @ w)


def portfolio_risk(V: CovarianceModel | np.ndarray, x) -> float:
    """sqrt(x^T V x); tiny negative radicands from rounding are clamped to 0."""
    mat = V.matrix if isinstance(V, CovarianceModel) else np.asarray(V, dtype=float)
    w = _weights(x)
    if mat.shape != (w.size, w.size):
        raise DomainError(f"covariance {mat.shape} does not match {w.size} weights")
    q = float(w @ mat @ w)
    if q < 0:
        if q < -NEGATIVE_VARIANCE_TOL:
            raise ArithmeticError(f"negative portfolio variance {q!r}")
        q = 0.0
    return math.sqrt(q)


def frontier_constants(M, V: CovarianceModel, assets: Sequence[str] | None = None) -> FrontierModel:
    """Compute (a, b, c, delta) with linear solves against V.

    Raises NotPositiveDefiniteError if V is not PD and DegenerateUniverseError
    if M is (numerically) a multiple of the ones vector.
    """
    M = np.array(M, dtype=float).ravel()
    n = M.size
    if V.matrix.shape != (n, n):
        raise DomainError(f"covariance {V.matrix.shape} does not match {n} means")
    if assets is None:
        assets = tuple(f"asset{j + 1}" for j in range(n))
    assets = tuple(assets)
    if len(assets) != n:
        raise DomainError(f"{len(assets)} asset ids for {n} means")
    if not V.is_positive_definite:
        raise NotPositiveDefiniteError("covariance matrix is not positive definite")
    spread = np.max(np.abs(M - M.mean()))
    if spread <= COLLINEAR_RTOL * np.max(np.abs(M)) or n < 2:
        raise DegenerateUniverseError("mean returns are collinear with the ones vector")

    solver = CholeskySolver(V.matrix, "covariance matrix")
    e = np.ones(n)
    Vinv_M = solver.solve(M)
    Vinv_e = solver.solve(e)
    a = float(M @ Vinv_e)
    b = float(M @ Vinv_M)
    c = float(e @ Vinv_e)
    delta = b * c - a * a
    if not (b > 0 and c > 0 and b * delta > 0):
        raise DegenerateUniverseError(f"frontier constants violate b*delta > 0 (b={b!r}, delta={delta!r})")
    M.setflags(write=False)
    Vinv_M.setflags(write=False)
    Vinv_e.setflags(write=False)
    return FrontierModel(assets, M, V, a, b, c, delta, solver, Vinv_M, Vinv_e)


def _check_target(r: float) -> float:
    r = float(r)
    if not r > 0:
        raise DomainError(f"target return must be positive, got {r!r}")
    return r


def frontier_allocation(f: FrontierModel, r: float) -> Allocation:
    """x(r) = ((c r - a)/delta) V^-1 M - ((a r - b)/delta) V^-1 e."""
    r = _check_target(r)
    x = _combine(f, f.c * r - f.a, f.b - f.a * r)
    # one refinement step: when delta is small the two terms nearly cancel and
    # the constraints drift; correcting the residuals restores them to rounding
    dr, de = float(f.M @ x) - r, float(x.sum()) - 1.0
    x = x - _combine(f, f.c * dr - f.a * de, f.b * de - f.a * dr)
    return Allocation(f.assets, x)


def _combine(f: FrontierModel, u: float, v: float) -> np.ndarray:
    return (u / f.delta) * f._Vinv_M + (v / f.delta) * f._Vinv_e


def frontier_allocation_qp(f: FrontierModel, r: float) -> Allocation:
    """x(r) through the generic QP solver with Q = V, A = [M e]^T, b = (r, 1)."""
    r = _check_target(r)
    problem = EqQpProblem(f.V.matrix, np.vstack([f.M, np.ones(f.n)]), np.array([r, 1.0]))
    sol = solve_eq_qp(problem, q_solver=f._solver)
    return Allocation(f.assets, sol.x_star)


def frontier_variance(f: FrontierModel, r: float) -> float:
    return (f.c * r * r - 2.0 * f.a * r + f.b) / f.delta


def frontier_risk(f: FrontierModel, r: float) -> float:
    """sigma(r) = sqrt((c r^2 - 2 a r + b) / delta)."""
    r = _check_target(r)
    q = frontier_variance(f, r)
    if q < 0:
        # the radicand is >= 1/c > 0 for a valid model
        if q < -NEGATIVE_VARIANCE_TOL * max(1.0, f.b / f.delta):
            raise ArithmeticError(f"negative frontier variance {q!r}")
        q = 0.0
    return math.sqrt(q)


def min_risk_portfolio(f: FrontierModel) -> MinRiskPortfolio:
    """x_min = V^-1 e / c, r_min = a / c, sigma_min = 1 / sqrt(c)."""
    x = f._Vinv_e / f.c
    # renormalise away the last ulp so the weights sum to 1 as stored
    x = x / x.sum()
    return MinRiskPortfolio(Allocation(f.assets, x), f.a / f.c, 1.0 / math.sqrt(f.c))


def hyperbola_residual(f: FrontierModel, sigma: float, r: float) -> float:
    """delta*sigma^2 - c*r^2 + 2*a*r - b; zero on the frontier."""
    return f.delta * sigma * sigma - f.c * r * r + 2.0 * f.a * r - f.b


def frontier_grid(f: FrontierModel, points: int = GRID_POINTS) -> np.ndarray:
    """Target returns for reports: ``points`` values from max(1e-6, r_min/4) to 4 r_min.

    The vertex r_min is always included when it is positive.
    """
    r_min = f.a / f.c
    lo = max(1e-6, r_min / 4.0)
    if r_min > 0:
        hi = 4.0 * r_min
    else:
        # no positive vertex: span a range set by the asset means instead
        hi = lo + 4.0 * (abs(r_min) + float(np.max(np.abs(f.M))))
    grid = np.linspace(lo, hi, points)
    if r_min > 0:
        grid = np.unique(np.append(grid, r_min))
    return grid


def performance_quotient(total_return: float, risk: float) -> float:
    """Return per unit of risk, e.g. (final quota value - 1) / per-period stddev."""
    if not risk > 0:
        raise DomainError(f"risk must be positive, got {risk!r}")
    return float(total_return) / float(risk)
