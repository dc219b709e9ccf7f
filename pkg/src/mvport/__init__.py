"""Mean-variance portfolio analytics: return statistics, the closed-form
frontier, monthly-contribution backtests and quota accounting."""

from .backtest import (
    BacktestState,
    MonthRecord,
    NaiveMode,
    Rule,
    StrategyConfig,
    choose_asset_markowitz,
    choose_asset_naive,
    contribution_vs_interest_split,
    run_backtest,
    suggested_allocation,
)
from .errors import (
    AlignmentError,
    DataGapError,
    DegenerateSeriesError,
    DegenerateUniverseError,
    DomainError,
    InsufficientCapitalError,
    MvportError,
    NotPositiveDefiniteError,
    NumericalError,
    RankDeficientError,
    ValidationError,
)
from .frontier import (
    Allocation,
    FrontierModel,
    MinRiskPortfolio,
    frontier_allocation,
    frontier_allocation_qp,
    frontier_constants,
    frontier_risk,
    hyperbola_residual,
    min_risk_portfolio,
    performance_quotient,
    portfolio_mean,
    portfolio_return_series,
    portfolio_risk,
)
from .qp import EqQpProblem, EqQpSolution, solve_eq_qp
from .quota import QuotaEntry, QuotaLedger, apply_day, build_ledger, capital_return, quota_return
from .stats import (
    CovarianceModel,
    PriceSeries,
    ReturnMatrix,
    correlation,
    correlation_matrix,
    covariance,
    covariance_matrix,
    mean,
    simple_returns,
    stddev,
    variance,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "Allocation",
    "BacktestState",
    "CovarianceModel",
    "DataGapError",
    "DegenerateSeriesError",
    "DegenerateUniverseError",
    "DomainError",
    "EqQpProblem",
    "EqQpSolution",
    "FrontierModel",
    "InsufficientCapitalError",
    "MinRiskPortfolio",
    "MonthRecord",
    "MvportError",
    "NaiveMode",
    "NotPositiveDefiniteError",
    "NumericalError",
    "PriceSeries",
    "QuotaEntry",
    "QuotaLedger",
    "RankDeficientError",
    "ReturnMatrix",
    "Rule",
    "StrategyConfig",
    "ValidationError",
    "apply_day",
    "build_ledger",
    "capital_return",
    "choose_asset_markowitz",
    "choose_asset_naive",
    "contribution_vs_interest_split",
    "correlation",
    "correlation_matrix",
    "covariance",
    "covariance_matrix",
    "frontier_allocation",
    "frontier_allocation_qp",
    "frontier_constants",
    "frontier_risk",
    "hyperbola_residual",
    "mean",
    "min_risk_portfolio",
    "performance_quotient",
    "portfolio_mean",
    "portfolio_return_series",
    "portfolio_risk",
    "quota_return",
    "run_backtest",
    "simple_returns",
    "solve_eq_qp",
    "stddev",
    "suggested_allocation",
    "variance",
]
