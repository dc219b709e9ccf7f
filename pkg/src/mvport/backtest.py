"""Monthly-contribution backtest: an initial buy, then one asset bought per month.

Each month the whole contribution goes into a single asset, chosen either by
the naive rule (the asset whose share of the portfolio is furthest below an
equal split) or by the Markowitz rule (the asset furthest below the
minimum-risk allocation estimated on the trailing months).  Fractional shares
are allowed, so no cash is ever left over.

Timing: the decision for month k uses holdings valued at the last close
before the month starts; the purchase executes at the close of the first
trading day of month k; the month is marked at its last close.
"""

from __future__ import annotations

import datetime as dt
import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataGapError, DomainError, NumericalError, ValidationError
from .frontier import Allocation, frontier_constants, min_risk_portfolio
from .stats import PriceSeries, ReturnMatrix, align, covariance_matrix

logger = logging.getLogger(__name__)

PERCENT_SUM_TOL = 1e-9


class Rule(str, enum.Enum):
    NAIVE = "naive"
    MARKOWITZ = "markowitz"
    INJECTED = "markowitz_with_injected_targets"


class NaiveMode(str, enum.Enum):
    BELOW_HALF = "below-half"
    LOWEST_CLOSE = "lowest-close"


@dataclass(frozen=True)
class StrategyConfig:
    """Parameters of one backtest run.

    ``start_date`` defaults to the first day of the month that follows
    ``warmup_months`` full months of data.  ``max_gap_days`` bounds the number
    of consecutive missing business days tolerated in the price history;
    ``None`` disables the check (useful for month-end-only data).
    """

    rule: Rule = Rule.MARKOWITZ
    initial_contribution: float = 1000.0
    monthly_contribution: float = 400.0
    warmup_months: int = 12
    start_date: dt.date | None = None
    end_date: dt.date | None = None
    naive_mode: NaiveMode = NaiveMode.BELOW_HALF
    max_gap_days: int | None = 10

    def __post_init__(self):
        object.__setattr__(self, "rule", Rule(self.rule))
        object.__setattr__(self, "naive_mode", NaiveMode(self.naive_mode))
        if not self.initial_contribution > 0:
            raise ValidationError("initial contribution must be positive")
        if self.monthly_contribution < 0:
            raise ValidationError("monthly contribution cannot be negative")
        if self.warmup_months < 1:
            raise ValidationError("warmup_months must be at least 1")


@dataclass(frozen=True)
class MonthRecord:
    date: dt.date
    month_end: dt.date
    chosen_asset: str | None
    current_shares: tuple[float, ...]
    suggested_shares: tuple[float, ...]
    percent_gaps: tuple[float, ...]
    contribution: float
    holdings: tuple[float, ...]
    closes: tuple[float, ...]
    patrimony_after: float
    warning: str | None = None


@dataclass
class BacktestState:
    assets: tuple[str, ...]
    holdings: dict[str, float]
    cash: float = 0.0
    contributed: float = 0.0
    ledger: list[MonthRecord] = field(default_factory=list)

    @classmethod
    def empty(cls, assets: Sequence[str]) -> BacktestState:
        return cls(tuple(assets), {a: 0.0 for a in assets})

    def shares(self) -> np.ndarray:
        return np.array([self.holdings[a] for a in self.assets])

    def value(self, closes) -> float:
        return float(self.shares() @ np.asarray(closes, dtype=float))

    def buy(self, asset: str, amount: float, price: float) -> None:
        self.holdings[asset] += amount / price
        self.contributed += amount


@dataclass(frozen=True)
class ContributionSplit:
    contributed: float
    growth: float
    percent_contributed: float
    percent_growth: float


def _month_start(d: dt.date, shift: int = 0) -> dt.date:
    k = d.year * 12 + d.month - 1 + shift
    return dt.date(k // 12, k % 12 + 1, 1)


def suggested_allocation(window: ReturnMatrix) -> Allocation:
    """Minimum-risk allocation estimated on a window of returns."""
    if window.shape[0] < 2:
        raise DomainError(f"window has {window.shape[0]} return rows, need at least 2")
    cov = covariance_matrix(window)
    f = frontier_constants(window.means, cov, window.assets)
    return min_risk_portfolio(f).allocation


def choose_asset_markowitz(current, suggested) -> int:
    """Index of the asset furthest below its suggested percentage.

    Both inputs are percent vectors summing to 100; ties go to the lowest index.
    """
    cur = np.asarray(current, dtype=float)
    sug = np.asarray(suggested, dtype=float)
    for name, v in (("current", cur), ("suggested", sug)):
        if abs(v.sum() - 100.0) > PERCENT_SUM_TOL * 100:
            raise DomainError(f"{name} percentages sum to {v.sum()!r}, not 100")
    return int(np.argmin(cur - sug))


def choose_asset_naive(
    state: BacktestState, prev_month_close, mode: NaiveMode | str = NaiveMode.BELOW_HALF
) -> int:
    """Index of the asset to buy under the naive rule.

    ``below-half`` picks the asset whose value share is furthest below an
    equal split; ``lowest-close`` picks the lowest previous close.
    """
    closes = np.asarray(prev_month_close, dtype=float)
    if NaiveMode(mode) is NaiveMode.LOWEST_CLOSE:
        return int(np.argmin(closes))
    values = state.shares() * closes
    total = values.sum()
    if total <= 0:
        return 0
    return int(np.argmin(values / total - 1.0 / len(values)))


def _targets_by_month(injected: Sequence[tuple[dt.date, Sequence[float]]] | None, n: int):
    out = {}
    for d, pct in injected or ():
        pct = tuple(float(p) for p in pct)
        if len(pct) != n:
            raise ValidationError(f"injected target for {d} has {len(pct)} entries, expected {n}")
        if abs(sum(pct) - 100.0) > 0.05:
            raise ValidationError(f"injected target for {d} sums to {sum(pct)}, not 100")
        out[(d.year, d.month)] = np.array(pct) * (100.0 / sum(pct))
    return out


def _check_gaps(dates: Sequence[dt.date], max_gap: int | None) -> None:
    if max_gap is None or len(dates) < 2:
        return
    d = np.array(dates, dtype="datetime64[D]")
    missing = np.busday_count(d[:-1], d[1:]) - 1
    bad = np.nonzero(missing > max_gap)[0]
    if bad.size:
        i = bad[0]
        raise DataGapError(
            f"{missing[i]} business days missing between {dates[i]} and {dates[i + 1]}"
        )


def _buy_split(weights: np.ndarray) -> np.ndarray:
    # a buy-only strategy cannot open short positions
    w = np.clip(weights, 0.0, None)
    return w / w.sum()


def run_backtest(
    prices: Sequence[PriceSeries],
    config: StrategyConfig,
    injected_targets: Sequence[tuple[dt.date, Sequence[float]]] | None = None,
) -> BacktestState:
    assets, dates, closes = align(prices)
    n = len(assets)
    returns = ReturnMatrix(assets, dates[1:], (closes[1:] - closes[:-1]) / closes[:-1])
    targets = _targets_by_month(injected_targets, n)
    if config.rule is Rule.INJECTED and not targets:
        raise ValidationError("rule requires injected targets")

    start = config.start_date or _month_start(dates[0], config.warmup_months)
    if start > dates[-1]:
        raise ValidationError(f"start date {start} is after the last price {dates[-1]}")
    end = config.end_date or dates[-1]
    history_from = _month_start(start, -config.warmup_months) if config.rule is Rule.MARKOWITZ else start
    if config.rule is Rule.MARKOWITZ and history_from < _month_start(dates[0]):
        raise ValidationError(
            f"price history starts {dates[0]}, warm-up needs data from {history_from}"
        )
    _check_gaps([d for d in dates if history_from <= d <= end], config.max_gap_days)

    date_arr = np.array(dates, dtype="datetime64[D]")
    state = BacktestState.empty(assets)
    equal = np.full(n, 100.0 / n)

    def target_for(month: dt.date) -> tuple[np.ndarray | None, str | None]:
        if config.rule is Rule.NAIVE:
            return equal, None
        if config.rule is Rule.INJECTED:
            t = targets.get((month.year, month.month))
            if t is None:
                raise ValidationError(f"no injected target for {month:%Y-%m}")
            return t, None
        window = returns.window(_month_start(month, -config.warmup_months), month)
        try:
            return suggested_allocation(window).as_percent(), None
        except (NumericalError, DomainError) as exc:
            logger.warning("no suggestion for %s: %s", month, exc)
            return None, f"suggestion unavailable: {exc}"

    month = _month_start(start)
    first = True
    while month <= end:
        nxt = _month_start(month, 1)
        lo = np.searchsorted(date_arr, np.datetime64(max(month, start)), side="left")
        hi = np.searchsorted(date_arr, np.datetime64(min(nxt - dt.timedelta(days=1), end)), side="right")
        prev = int(np.searchsorted(date_arr, np.datetime64(month), side="left")) - 1
        if lo < hi:
            i_trade, i_end = int(lo), int(hi) - 1
        else:
            if prev < 0:
                raise DataGapError(f"no prices on or before {month}")
            # nearest prior trading day stands in for the missing month
            i_trade = i_end = prev
        target, warning = target_for(month)

        if first:
            split = _buy_split(target / 100.0) if target is not None else equal / 100.0
            if target is None:
                warning = (warning or "") + "; initial buy split equally"
            for j, a in enumerate(assets):
                state.buy(a, config.initial_contribution * split[j], closes[i_trade, j])
            current = suggested = 100.0 * split
            chosen = None
            amount = config.initial_contribution
        else:
            ref = closes[max(prev, 0)]
            values = state.shares() * ref
            current = 100.0 * values / values.sum()
            suggested = target
            if target is None:
                chosen, amount = None, 0.0
            else:
                if config.rule is Rule.NAIVE:
                    j = choose_asset_naive(state, ref, config.naive_mode)
                else:
                    j = choose_asset_markowitz(current, suggested)
                chosen, amount = assets[j], config.monthly_contribution
                if amount > 0:
                    state.buy(chosen, amount, closes[i_trade, j])

        sug = suggested if suggested is not None else np.full(n, np.nan)
        state.ledger.append(
            MonthRecord(
                date=dates[i_trade],
                month_end=dates[i_end],
                chosen_asset=chosen,
                current_shares=tuple(float(c) for c in current),
                suggested_shares=tuple(float(s) for s in sug),
                percent_gaps=tuple(float(c - s) for c, s in zip(current, sug)),
                contribution=float(amount),
                holdings=tuple(float(h) for h in state.shares()),
                closes=tuple(float(c) for c in closes[i_end]),
                patrimony_after=state.value(closes[i_end]),
                warning=warning,
            )
        )
        first = False
        month = nxt
    return state


def split_from_totals(contributed: float, final: float) -> ContributionSplit:
    if not final > 0:
        raise DomainError(f"final patrimony must be positive, got {final!r}")
    growth = final - contributed
    return ContributionSplit(contributed, growth, 100.0 * contributed / final, 100.0 * growth / final)


def contribution_vs_interest_split(state: BacktestState) -> ContributionSplit:
    """How much of the final patrimony was paid in and how much is growth."""
    if not state.ledger:
        raise DomainError("backtest has no months")
    return split_from_totals(state.contributed, state.ledger[-1].patrimony_after)

