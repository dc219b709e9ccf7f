"""Quota (unit) accounting for a portfolio with deposits and withdrawals.

The quota value compounds the portfolio returns and ignores cash flows;
flows only change the number of quotas held.  On each day the return is
applied first and the flow is converted at the post-return quota value.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import stats
from .errors import DomainError, InsufficientCapitalError
from .frontier import performance_quotient

INITIAL_QUOTA = 1.0
# slack for withdrawing "everything" when capital carries rounding noise
OVERDRAFT_ATOL = 1e-9


@dataclass(frozen=True)
class QuotaEntry:
    date: dt.date | None
    portfolio_return: float
    flow: float
    quota_value: float
    quota_count: float

    @property
    def capital(self) -> float:
        return self.quota_count * self.quota_value


@dataclass(frozen=True)
class QuotaLedger:
    entries: tuple[QuotaEntry, ...] = ()
    initial_quota: float = INITIAL_QUOTA

    def __len__(self):
        return len(self.entries)

    @property
    def last(self) -> QuotaEntry:
        if not self.entries:
            raise DomainError("ledger is empty")
        return self.entries[-1]

    def quota_values(self) -> np.ndarray:
        return np.array([e.quota_value for e in self.entries])

    def capitals(self) -> np.ndarray:
        return np.array([e.capital for e in self.entries])

    def net_deposited(self) -> float:
        return float(sum(e.flow for e in self.entries))


def apply_day(
    ledger: QuotaLedger, portfolio_return: float, flow: float = 0.0, date: dt.date | None = None
) -> QuotaLedger:
    """Return a new ledger with one more day appended.

    On an empty ledger the previous quota is ``ledger.initial_quota`` and the
    previous quota count is zero, so the first call usually carries the
    opening deposit with a zero return.
    """
    r = float(portfolio_return)
    flow = float(flow)
    if not 1.0 + r > 0.0:
        raise DomainError(f"return {r!r} would wipe out the quota")
    if ledger.entries:
        prev_q, prev_n = ledger.last.quota_value, ledger.last.quota_count
    else:
        prev_q, prev_n = ledger.initial_quota, 0.0
    q = prev_q * (1.0 + r)
    capital = prev_n * q
    if flow < 0 and -flow > capital + OVERDRAFT_ATOL:
        raise InsufficientCapitalError(
            f"withdrawal of {-flow:.2f} exceeds capital {capital:.2f}"
        )
    n = max(prev_n + flow / q, 0.0)
    entry = QuotaEntry(date, r, flow, q, n)
    return QuotaLedger(ledger.entries + (entry,), ledger.initial_quota)


def build_ledger(
    returns: Iterable[float],
    flows: Iterable[float],
    dates: Iterable[dt.date | None] | None = None,
    initial_quota: float = INITIAL_QUOTA,
) -> QuotaLedger:
    returns, flows = list(returns), list(flows)
    if len(returns) != len(flows):
        raise DomainError(f"{len(returns)} returns but {len(flows)} flows")
    dates = list(dates) if dates is not None else [None] * len(returns)
    ledger = QuotaLedger(initial_quota=initial_quota)
    for d, r, f in zip(dates, returns, flows):
        ledger = apply_day(ledger, r, f, d)
    return ledger


def returns_from_prices(prices: Sequence[float]) -> list[float]:
    """Zero for the first day, then simple returns."""
    p = [float(x) for x in prices]
    return [0.0] + [(b - a) / a for a, b in zip(p, p[1:])]


def infer_returns(balances: Sequence[float], flows: Sequence[float]) -> list[float]:
    """Recover daily returns from observed balances and flows alone.

    ``balances[t]`` is the capital observed on day t before that day's flow;
    the day's return is ``balances[t] / (balances[t-1] + flows[t-1]) - 1``.
    Day 0 gets a zero return.
    """
    if len(balances) != len(flows):
        raise DomainError(f"{len(balances)} balances but {len(flows)} flows")
    out = [0.0]
    for t in range(1, len(balances)):
        base = balances[t - 1] + flows[t - 1]
        if not base > 0:
            raise DomainError(f"no capital invested before day {t}")
        out.append(balances[t] / base - 1.0)
    return out


def ledger_from_balances(
    balances: Sequence[float], flows: Sequence[float], dates=None
) -> QuotaLedger:
    return build_ledger(infer_returns(balances, flows), flows, dates)


def quota_return(ledger: QuotaLedger) -> float:
    """Final quota value over the initial one, minus 1."""
    if not ledger.entries:
        raise DomainError("quota return of an empty ledger")
    return ledger.last.quota_value / ledger.initial_quota - 1.0


def capital_return(ledger: QuotaLedger) -> float:
    """Final capital over the net amount deposited, minus 1."""
    if not ledger.entries:
        raise DomainError("capital return of an empty ledger")
    deposited = ledger.net_deposited()
    if not deposited > 0:
        raise DomainError(f"net deposits must be positive, got {deposited!r}")
    return ledger.last.capital / deposited - 1.0


def quota_period_returns(ledger: QuotaLedger) -> np.ndarray:
    """Per-period returns of the quota series (first entry excluded)."""
    q = ledger.quota_values()
    if q.size < 2:
        raise DomainError("need at least two entries for period returns")
    return q[1:] / q[:-1] - 1.0


def quota_performance(ledger: QuotaLedger, ddof: int = 0) -> tuple[float, float, float]:
    """(total return, per-period risk, performance quotient) of a ledger."""
    total = quota_return(ledger)
    risk = stats.stddev(quota_period_returns(ledger), ddof)
    return total, risk, performance_quotient(total, risk)
