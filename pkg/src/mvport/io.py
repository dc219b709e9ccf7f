"""CSV ingestion and report emission.

Price files look like::

    date,IVVB11,BOVA11
    2021-04-09,254.00,113.01

With ``locale="comma"`` the delimiter is ``;`` and numbers use a decimal
comma with optional ``.`` thousands separators and an ``R$`` prefix, as in
``1.051,68``; dates may then also be written ``dd/mm/yyyy``.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .backtest import BacktestState, contribution_vs_interest_split
from .errors import ValidationError
from .frontier import (
    FrontierModel,
    frontier_allocation,
    frontier_grid,
    frontier_risk,
    min_risk_portfolio,
)
from .quota import QuotaLedger
from .stats import PriceSeries

LOCALES = ("dot", "comma")


def _delimiter(locale: str) -> str:
    if locale not in LOCALES:
        raise ValidationError(f"unknown locale {locale!r}; expected one of {LOCALES}")
    return ";" if locale == "comma" else ","


def parse_number(text: str, locale: str = "dot") -> float:
    s = text.strip().replace("R$", "").replace(" ", "")
    if locale == "comma":
        s = s.replace(".", "").replace(",", ".")
    if not s:
        raise ValueError("empty number")
    value = float(s)
    if not math.isfinite(value):
        raise ValueError(f"non-finite number {text!r}")
    return value


def parse_date(text: str, locale: str = "dot") -> dt.date:
    s = text.strip()
    try:
        return dt.date.fromisoformat(s)
    except ValueError:
        if locale == "comma":
            return dt.datetime.strptime(s, "%d/%m/%Y").date()
        raise


def _read_rows(path: Path, locale: str) -> tuple[list[str], list[tuple[int, list[str]]]]:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"{path}: no such file")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh, delimiter=_delimiter(locale))
        rows = [(reader.line_num, row) for row in reader if any(c.strip() for c in row)]
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header = [h.strip() for h in rows[0][1]]
    return header, rows[1:]


def ingest_prices(path, locale: str = "dot") -> list[PriceSeries]:
    """One PriceSeries per asset column of a ``date,<asset>...`` CSV."""
    header, body = _read_rows(Path(path), locale)
    if len(header) < 2 or header[0].lower() != "date":
        raise ValidationError(f"{path}: header must be 'date,<asset1>,...', got {header}")
    assets = header[1:]
    if len(set(assets)) != len(assets) or any(not a for a in assets):
        raise ValidationError(f"{path}: blank or duplicate asset names in header")
    if not body:
        raise ValidationError(f"{path}: no data rows")
    dates, cols = [], [[] for _ in assets]
    for line, row in body:
        if len(row) != len(header):
            raise ValidationError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
        try:
            dates.append(parse_date(row[0], locale))
            for j, cell in enumerate(row[1:]):
                cols[j].append(parse_number(cell, locale))
        except ValueError as exc:
            raise ValidationError(f"{path}:{line}: cannot parse row {row}: {exc}") from None
    for (l0, _), (l1, _), d0, d1 in zip(body, body[1:], dates, dates[1:]):
        if d1 <= d0:
            raise ValidationError(f"{path}:{l1}: date {d1} does not follow {d0}")
    return [PriceSeries(a, dates, c) for a, c in zip(assets, cols)]


def fmt(x: float, precision: int | None = None) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if precision is None:
        return repr(float(x))
    return f"{x:.{precision}f}"


def write_prices(series: Sequence[PriceSeries], path, precision: int | None = None) -> Path:
    """Write aligned series in the ingest format; all series must share dates."""
    dates = series[0].dates
    if any(s.dates != dates for s in series):
        raise ValidationError("series must share the same dates to be written together")
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date"] + [s.asset_id for s in series])
        for i, d in enumerate(dates):
            w.writerow([d.isoformat()] + [fmt(s.closes[i], precision) for s in series])
    return path


def read_injected_targets(path, locale: str = "dot") -> tuple[list[str], list[tuple[dt.date, tuple[float, ...]]]]:
    """``date,ps_<asset1>,ps_<asset2>...`` rows of target percentages."""
    header, body = _read_rows(Path(path), locale)
    if len(header) < 2 or header[0].lower() != "date":
        raise ValidationError(f"{path}: header must be 'date,ps_<asset>,...', got {header}")
    assets = [h[3:] if h.lower().startswith("ps_") else h for h in header[1:]]
    out = []
    for line, row in body:
        if len(row) != len(header):
            raise ValidationError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
        try:
            d = parse_date(row[0], locale)
            out.append((d, tuple(parse_number(c.replace("%", ""), locale) for c in row[1:])))
        except ValueError as exc:
            raise ValidationError(f"{path}:{line}: cannot parse row {row}: {exc}") from None
    return assets, out


def read_quota_input(path, locale: str = "dot"):
    """Rows of ``date,price,flow`` or ``date,return,flow``.

    Returns (dates, returns, flows); with prices, day 0 gets a zero return.
    """
    from .quota import returns_from_prices

    header, body = _read_rows(Path(path), locale)
    cols = [h.lower() for h in header]
    if cols[:1] != ["date"] or "flow" not in cols or not ({"price", "return"} & set(cols)):
        raise ValidationError(f"{path}: header needs date, flow and price or return, got {header}")
    kind = "price" if "price" in cols else "return"
    ki, fi = cols.index(kind), cols.index("flow")
    dates, values, flows = [], [], []
    for line, row in body:
        try:
            dates.append(parse_date(row[0], locale))
            values.append(parse_number(row[ki], locale) if row[ki].strip() else 0.0)
            flows.append(parse_number(row[fi], locale) if row[fi].strip() else 0.0)
        except (ValueError, IndexError) as exc:
            raise ValidationError(f"{path}:{line}: cannot parse row {row}: {exc}") from None
    if kind == "price":
        if any(v <= 0 for v in values):
            raise ValidationError(f"{path}: prices must be positive")
        values = returns_from_prices(values)
    return dates, values, flows


QUOTA_COLUMNS = ["date", "return", "flow", "quota_value", "quota_count", "capital"]


def write_quota_ledger(ledger: QuotaLedger, path, precision: int | None = None) -> Path:
    """Quota-ledger CSV; by default rounded like a printed statement
    (quota 4 decimals, currency and counts 2)."""
    path = Path(path)
    pq, pc, pr = (4, 2, 4) if precision is None else (precision,) * 3
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(QUOTA_COLUMNS)
        for e in ledger.entries:
            w.writerow([
                e.date.isoformat() if e.date else "",
                fmt(e.portfolio_return, pr),
                fmt(e.flow, pc),
                fmt(e.quota_value, pq),
                fmt(e.quota_count, pc),
                fmt(e.capital, pc),
            ])
    return path


def emit_frontier_report(
    f: FrontierModel, out_dir, grid: Iterable[float] | None = None, precision: int | None = None
) -> tuple[Path, Path]:
    """Write ``frontier.csv`` (r, sigma, x_1..x_n) and ``frontier_summary.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = frontier_grid(f) if grid is None else np.asarray(list(grid), dtype=float)
    csv_path = out / "frontier.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "sigma"] + [f"x_{j + 1}" for j in range(f.n)])
        for r in grid:
            x = frontier_allocation(f, r).weights
            w.writerow([fmt(r, precision), fmt(frontier_risk(f, r), precision)] + [fmt(v, precision) for v in x])
    mr = min_risk_portfolio(f)
    summary = {
        "assets": list(f.assets),
        "a": f.a,
        "b": f.b,
        "c": f.c,
        "delta": f.delta,
        "r_min": mr.expected_return,
        "sigma_min": mr.risk,
        "x_min": [float(v) for v in mr.allocation.weights],
    }
    if precision is not None:
        summary = json.loads(json.dumps(summary), parse_float=lambda s: round(float(s), precision))
    json_path = out / "frontier_summary.json"
    json_path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return csv_path, json_path


def backtest_columns(assets: Sequence[str]) -> list[str]:
    return (
        ["date", "month_end"]
        + [f"close_{a}" for a in assets]
        + [f"shares_{a}" for a in assets]
        + ["patrimony", "contribution", "chosen_asset"]
        + [f"p_{a}" for a in assets]
        + [f"ps_{a}" for a in assets]
        + [f"dp_{a}" for a in assets]
        + ["warning"]
    )


def emit_backtest_report(
    state: BacktestState, out_dir, precision: int | None = None, name: str = "backtest"
) -> list[Path]:
    """Monthly ``<name>.csv`` plus ``<name>_summary.csv`` when any month ran."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(backtest_columns(state.assets))
        for rec in state.ledger:
            w.writerow(
                [rec.date.isoformat(), rec.month_end.isoformat()]
                + [fmt(c, precision) for c in rec.closes]
                + [fmt(h, precision) for h in rec.holdings]
                + [fmt(rec.patrimony_after, precision), fmt(rec.contribution, precision), rec.chosen_asset or ""]
                + [fmt(v, precision) for v in rec.current_shares]
                + [fmt(v, precision) for v in rec.suggested_shares]
                + [fmt(v, precision) for v in rec.percent_gaps]
                + [rec.warning or ""]
            )
    paths = [path]
    if state.ledger:
        split = contribution_vs_interest_split(state)
        spath = out / f"{name}_summary.csv"
        with spath.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["contributed", "final_patrimony", "growth", "percent_contributed", "percent_growth"])
            w.writerow([
                fmt(split.contributed, precision),
                fmt(state.ledger[-1].patrimony_after, precision),
                fmt(split.growth, precision),
                fmt(split.percent_contributed, precision),
                fmt(split.percent_growth, precision),
            ])
        paths.append(spath)
    return paths


def read_csv_dicts(path) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
