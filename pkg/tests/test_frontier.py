import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mvport import stats
from mvport.errors import DegenerateUniverseError, DomainError, NotPositiveDefiniteError
from mvport.frontier import (
    Allocation,
    frontier_allocation,
    frontier_allocation_qp,
    frontier_constants,
    frontier_grid,
    frontier_risk,
    hyperbola_residual,
    min_risk_portfolio,
    performance_quotient,
    portfolio_mean,
    portfolio_return_series,
    portfolio_risk,
)
from mvport.stats import CovarianceModel


def cov_model(V):
    V = np.asarray(V, dtype=float)
    from mvport.qp import is_positive_definite

    return CovarianceModel(V, np.sqrt(np.diag(V)), is_positive_definite(V))


def identity_model():
    return frontier_constants([0.0, 1.0], cov_model(np.eye(2)))


def random_model(seed, n=3, positive_vertex=True):
    rng = np.random.default_rng(seed)
    while True:
        B = rng.normal(size=(n, n)) * 0.01
        V = B @ B.T + 1e-5 * np.eye(n)
        M = rng.uniform(0.0005, 0.003, size=n)
        f = frontier_constants(M, cov_model(V))
        if f.a > 0 or not positive_vertex:
            return f


def test_identity_constants():
    f = identity_model()
    assert (f.a, f.b, f.c, f.delta) == pytest.approx((1, 1, 2, 1))
    np.testing.assert_allclose(frontier_allocation(f, 0.5).weights, [0.5, 0.5])
    assert frontier_risk(f, 0.5) == pytest.approx(math.sqrt(0.5))


def test_degenerate_and_not_pd():
    with pytest.raises(DegenerateUniverseError):
        frontier_constants([0.1, 0.1], cov_model(np.eye(2)))
    with pytest.raises(NotPositiveDefiniteError):
        frontier_constants([0.1, 0.2], cov_model([[1, 1], [1, 1]]))


def test_target_must_be_positive():
    f = identity_model()
    with pytest.raises(DomainError):
        frontier_allocation(f, 0.0)
    with pytest.raises(DomainError):
        frontier_risk(f, -0.1)


def test_min_risk_identity_n():
    for n in (2, 3, 5):
        M = np.linspace(0.01, 0.02, n)
        mr = min_risk_portfolio(frontier_constants(M, cov_model(np.eye(n))))
        np.testing.assert_allclose(mr.allocation.weights, np.full(n, 1 / n))
        assert mr.risk == pytest.approx(1 / math.sqrt(n))
        assert mr.allocation.weights.sum() == 1.0


def test_min_risk_at_vertex():
    f = random_model(1)
    mr = min_risk_portfolio(f)
    r0 = f.a / f.c
    np.testing.assert_allclose(frontier_allocation(f, r0).weights, mr.allocation.weights, atol=1e-10)
    assert frontier_risk(f, r0) == pytest.approx(1 / math.sqrt(f.c), rel=1e-10)
    assert mr.expected_return == pytest.approx(r0, rel=1e-10)


def test_vertex_is_stationary():
    f = random_model(2)
    r0 = f.a / f.c
    h = 1e-6 * r0
    slope = (frontier_risk(f, r0 + h) - frontier_risk(f, r0 - h)) / (2 * h)
    assert abs(slope) < 1e-6


def test_sigma_min_is_global():
    f = random_model(3)
    mr = min_risk_portfolio(f)
    grid = np.geomspace(1e-6, 1.0, 400)
    risks = np.array([frontier_risk(f, r) for r in grid])
    assert np.all(risks >= mr.risk - 1e-15)


def test_constraints_on_log_grid():
    f = random_model(4, n=4)
    for r in np.geomspace(1e-6, 0.1, 60):
        x = frontier_allocation(f, r).weights
        assert abs(x.sum() - 1) <= 1e-8
        assert abs(f.M @ x - r) <= 1e-8
        assert portfolio_risk(f.V, x) == pytest.approx(frontier_risk(f, r), rel=1e-10)


def test_qp_route_matches():
    f = random_model(5, n=4)
    for r in frontier_grid(f, 20):
        np.testing.assert_allclose(frontier_allocation_qp(f, r).weights, frontier_allocation(f, r).weights, atol=1e-8)


def test_grid_includes_vertex():
    f = random_model(6)
    g = frontier_grid(f)
    assert np.any(g == f.a / f.c)
    assert g[0] == pytest.approx(max(1e-6, f.a / f.c / 4))
    assert g[-1] == pytest.approx(4 * f.a / f.c)


def test_correlation_expansion_of_risk():
    f = random_model(7, n=4)
    x = frontier_allocation(f, 0.002).weights
    s = f.V.stddevs
    rho = stats.correlation_matrix(f.V)
    expanded = math.sqrt(sum(x[j] * x[k] * s[j] * s[k] * rho[j, k] for j in range(4) for k in range(4)))
    assert expanded == pytest.approx(portfolio_risk(f.V, x), rel=1e-10)


def test_allocation_checks():
    with pytest.raises(DomainError):
        Allocation(("a", "b"), [0.5, 0.6])
    Allocation(("a", "b"), [1.5, -0.5])  # leverage is fine
    np.testing.assert_allclose(Allocation.equal(("a", "b", "c")).as_percent(), [100 / 3] * 3)


def test_portfolio_series_on_valor(valor):
    R = stats.simple_returns(valor)
    p1 = portfolio_return_series(R, np.full(3, 1 / 3))
    p2 = portfolio_return_series(R, np.array([0.2, 0.5, 0.3]))
    assert round(p1[0], 4) == 0.0115
    assert round(p2[0], 4) == 0.0118
    assert round(portfolio_mean(R.means, np.full(3, 1 / 3)), 4) == 0.0036
    single = portfolio_return_series(R, np.array([1.0, 0, 0]))
    np.testing.assert_array_equal(single, R.column("IVVB11"))
    cov = stats.covariance_matrix(R)
    for w in (np.full(3, 1 / 3), np.array([0.2, 0.5, 0.3])):
        series = portfolio_return_series(R, w)
        assert portfolio_risk(cov, w) == pytest.approx(stats.stddev(series), rel=1e-10)
        assert portfolio_mean(R.means, w) == pytest.approx(stats.mean(series), rel=1e-12)
    with pytest.raises(DomainError):
        portfolio_return_series(R, Allocation(("x", "y", "z"), np.full(3, 1 / 3)))


def test_portfolio_risk_unit():
    assert portfolio_risk(np.eye(3), [1.0, 0, 0]) == 1.0


def test_performance_quotient():
    assert performance_quotient(3.14 - 1, 0.0143) == pytest.approx(149.65, abs=0.01)
    assert performance_quotient(1.37 - 1, 0.0179) == pytest.approx(20.67, abs=0.01)
    assert performance_quotient(0.0, 0.02) == 0.0
    with pytest.raises(DomainError):
        performance_quotient(0.1, 0.0)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_delta_positive_and_hyperbola(seed, n):
    f = random_model(seed, n, positive_vertex=False)
    assert f.delta > 0 and f.b > 0 and f.c > 0
    for r in frontier_grid(f, 25):
        x = frontier_allocation(f, r).weights
        sigma = portfolio_risk(f.V, x)
        assert abs(hyperbola_residual(f, sigma, r)) <= 1e-8 * max(1.0, f.b)
