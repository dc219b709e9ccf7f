"""Descriptive statistics on dated price and return series.

Population normalization (1/m) is the default everywhere.  The ``ddof``
keyword switches to 1/(m - ddof), which is what is needed to match tables
produced with the common sample convention (1/(m-1)).
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AlignmentError, DegenerateSeriesError, DomainError, ValidationError
from .qp import is_positive_definite

CORRELATION_SLACK = 1e-12


@dataclass(frozen=True)
class PriceSeries:
    """Adjusted closes of one asset, strictly increasing in date."""

    asset_id: str
    dates: tuple[dt.date, ...]
    closes: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "closes", tuple(float(c) for c in self.closes))
        if len(self.dates) != len(self.closes):
            raise ValidationError(
                f"{self.asset_id}: {len(self.dates)} dates but {len(self.closes)} closes"
            )
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise ValidationError(
                    f"{self.asset_id}: dates not strictly increasing at {cur.isoformat()}"
                )
        for d, c in zip(self.dates, self.closes):
            if not (c > 0 and math.isfinite(c)):
                raise ValidationError(f"{self.asset_id}: non-positive close {c} on {d.isoformat()}")

    def __len__(self):
        return len(self.dates)


@dataclass(frozen=True, eq=False)
class ReturnMatrix:
    """m x n simple returns with per-asset means.

    ``dates[i]`` is the date at which return ``returns[i]`` is realised, i.e.
    the later of the two prices it was computed from.
    """

    assets: tuple[str, ...]
    dates: tuple[dt.date, ...]
    returns: np.ndarray
    means: np.ndarray = field(init=False)

    def __post_init__(self):
        r = np.array(self.returns, dtype=float)
        if r.ndim != 2:
            raise ValidationError("returns must be a 2-D array")
        m, n = r.shape
        if n < 1 or n != len(self.assets):
            raise ValidationError(f"{n} return columns for {len(self.assets)} assets")
        if m < 1:
            raise ValidationError("a return matrix needs at least one row")
        if len(self.dates) != m:
            raise ValidationError(f"{m} return rows but {len(self.dates)} dates")
        r.setflags(write=False)
        means = np.array([mean(r[:, j]) for j in range(n)])
        means.setflags(write=False)
        object.__setattr__(self, "assets", tuple(self.assets))
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "returns", r)
        object.__setattr__(self, "means", means)

    @property
    def shape(self) -> tuple[int, int]:
        return self.returns.shape

    def column(self, asset: str) -> np.ndarray:
        return self.returns[:, self.assets.index(asset)]

    def window(self, start: dt.date, end: dt.date) -> ReturnMatrix:
        """Rows with ``start <= date < end``."""
        keep = [i for i, d in enumerate(self.dates) if start <= d < end]
        return ReturnMatrix(self.assets, [self.dates[i] for i in keep], self.returns[keep])


@dataclass(frozen=True, eq=False)
class CovarianceModel:
    matrix: np.ndarray
    stddevs: np.ndarray
    is_positive_definite: bool

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _vector(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).ravel()
    if a.size == 0:
        raise DomainError("empty data vector")
    return a


def _denominator(m: int, ddof: int) -> int:
    if ddof < 0 or m - ddof < 1:
        raise DomainError(f"ddof={ddof} leaves no degrees of freedom for {m} observations")
    return m - ddof


def mean(v) -> float:
    a = _vector(v)
    return float(np.sum(a) / a.size)


def variance(v, ddof: int = 0) -> float:
    a = _vector(v)
    d = a - mean(a)
    return float(np.dot(d, d) / _denominator(a.size, ddof))


def stddev(v, ddof: int = 0) -> float:
    return math.sqrt(variance(v, ddof))


def stddev_population(v) -> float:
    """sqrt((1/m) * sum((v_i - mean)^2))."""
    return stddev(v, 0)


def stddev_sample(v) -> float:
    return stddev(v, 1)


def covariance(v, u, ddof: int = 0) -> float:
    a, b = _vector(v), _vector(u)
    if a.size != b.size:
        raise DomainError(f"length mismatch: {a.size} vs {b.size}")
    return float(np.dot(a - mean(a), b - mean(b)) / _denominator(a.size, ddof))


def correlation(v, u) -> float:
    """Pearson correlation, guaranteed to lie in [-1, 1].

    Raises DegenerateSeriesError when either input has zero dispersion.
    """
    sv, su = stddev(v), stddev(u)
    if sv == 0.0 or su == 0.0:
        raise DegenerateSeriesError("correlation undefined for a constant series")
    rho = covariance(v, u) / (sv * su)
    if abs(rho) > 1.0 + CORRELATION_SLACK:
        raise ArithmeticError(f"correlation {rho!r} escaped [-1, 1]")
    return max(-1.0, min(1.0, rho))


def align(prices: Sequence[PriceSeries]) -> tuple[tuple[str, ...], tuple[dt.date, ...], np.ndarray]:
    """Inner-join price series on their dates.

    Returns asset ids, the common dates and an (m, n) matrix of closes.
    """
    if not prices:
        raise AlignmentError("no price series given")
    ids = [p.asset_id for p in prices]
    if len(set(ids)) != len(ids):
        raise AlignmentError(f"duplicate asset ids in {ids}")
    common = set(prices[0].dates)
    if len(common) < 2:
        raise AlignmentError(f"series {prices[0].asset_id!r} has fewer than 2 observations")
    for p in prices[1:]:
        common &= set(p.dates)
        if len(common) < 2:
            raise AlignmentError(
                f"series {p.asset_id!r} shares fewer than 2 dates with {ids[: ids.index(p.asset_id)]}"
            )
    dates = tuple(sorted(common))
    lookup = [dict(zip(p.dates, p.closes)) for p in prices]
    closes = np.array([[lk[d] for lk in lookup] for d in dates])
    return tuple(ids), dates, closes


def simple_returns(prices: Sequence[PriceSeries]) -> ReturnMatrix:
    """(p_t - p_{t-1}) / p_{t-1} on the aligned dates; the first date is the base."""
    assets, dates, closes = align(prices)
    r = (closes[1:] - closes[:-1]) / closes[:-1]
    return ReturnMatrix(assets, dates[1:], r)


def covariance_matrix(R: ReturnMatrix, ddof: int = 0) -> CovarianceModel:
    """V = 1/(m - ddof) * sum_i (R_i - M)(R_i - M)^T, built exactly symmetric."""
    m, n = R.shape
    if m < 2:
        raise DomainError(f"covariance needs at least 2 return rows, got {m}")
    centred = R.returns - R.means
    denom = _denominator(m, ddof)
    acc = np.zeros((n, n))
    for row in centred:
        acc += np.outer(row, row)
    upper = np.triu(acc / denom)
    V = upper + np.triu(upper, 1).T
    V.setflags(write=False)
    sd = np.sqrt(np.diag(V))
    sd.setflags(write=False)
    return CovarianceModel(V, sd, is_positive_definite(V))


def correlation_matrix(cov: CovarianceModel) -> np.ndarray:
    if np.any(cov.stddevs == 0):
        raise DegenerateSeriesError("correlation matrix undefined with a zero-variance asset")
    rho = cov.matrix / np.outer(cov.stddevs, cov.stddevs)
    return np.clip(rho, -1.0, 1.0)
