"""Command-line entry point.

    mvport stats     --input prices.csv --out-dir out [--weights 0.2,0.5,0.3]
    mvport frontier  --input prices.csv --out-dir out [--points 200]
    mvport min-risk  --input prices.csv --out-dir out
    mvport backtest  --input prices.csv --out-dir out --rule markowitz
    mvport quota     --input flows.csv  --out-dir out

Every subcommand also takes ``--config FILE``: a flat ``key = value`` file
whose keys are the long option names (``naive-mode`` or ``naive_mode``).
Flags given on the command line win over the file.

Exit codes: 0 success, 2 validation error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io, stats
from .backtest import NaiveMode, Rule, StrategyConfig, run_backtest
from .errors import NumericalError, ValidationError
from .frontier import frontier_constants, frontier_grid, min_risk_portfolio, portfolio_return_series
from .quota import build_ledger, quota_performance, quota_return, capital_return

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3

log = logging.getLogger("mvport")


def _date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO date: {text!r}") from None


def _optional_int(text: str) -> int | None:
    return None if str(text).lower() in ("none", "off", "") else int(text)


def _weights(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad weight list {text!r}") from None


def read_config(path) -> dict[str, str]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"{p}: config file not found")
    out = {}
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{p}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", type=Path, help="input CSV")
    p.add_argument("--out-dir", type=Path, default=Path("."))
    p.add_argument("--precision", type=int, default=None, help="decimals in reports (default: full)")
    p.add_argument("--locale", choices=io.LOCALES, default="dot")
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--start", type=_date, default=None)
    p.add_argument("--end", type=_date, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvport", description="Mean-variance portfolio tools")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="per-asset means, stddevs, covariance and correlation")
    _common(p)
    p.add_argument("--ddof", type=int, default=0, choices=(0, 1))
    p.add_argument("--weights", type=_weights, default=None, help="comma list; adds a portfolio series")

    p = sub.add_parser("frontier", help="frontier data series and constants")
    _common(p)
    p.add_argument("--points", type=int, default=200)

    p = sub.add_parser("min-risk", help="minimum-risk portfolio")
    _common(p)

    p = sub.add_parser("backtest", help="monthly contribution backtest")
    _common(p)
    p.add_argument("--rule", choices=("naive", "markowitz"), default="markowitz")
    p.add_argument("--injected-targets", type=Path, default=None)
    p.add_argument("--naive-mode", choices=[m.value for m in NaiveMode], default="below-half")
    p.add_argument("--initial", type=float, default=1000.0)
    p.add_argument("--monthly", type=float, default=400.0)
    p.add_argument("--warmup-months", type=int, default=12)
    p.add_argument("--max-gap-days", type=_optional_int, default=10)

    p = sub.add_parser("quota", help="quota ledger from date,price|return,flow rows")
    _common(p)
    p.add_argument("--ddof", type=int, default=0, choices=(0, 1))
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    cfg = read_config(args.config)
    cfg.pop("config", None)
    known = vars(args)
    unknown = sorted(set(cfg) - set(known))
    if unknown:
        raise ValidationError(f"{args.config}: unknown config keys {unknown}")
    # string defaults go through each option's type conversion on re-parse
    sub = parser._subparsers._group_actions[0].choices[args.command]
    sub.set_defaults(**cfg)
    return parser.parse_args(argv)


def _require_input(args) -> Path:
    if args.input is None:
        raise ValidationError("--input is required")
    if not args.input.is_file():
        raise ValidationError(f"{args.input}: input file not found")
    return args.input


def _load_returns(args) -> stats.ReturnMatrix:
    series = io.ingest_prices(_require_input(args), args.locale)
    R = stats.simple_returns(series)
    if args.start or args.end:
        R = R.window(args.start or R.dates[0], args.end or R.dates[-1] + dt.timedelta(days=1))
    return R


def _write_rows(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_stats(args) -> None:
    R = _load_returns(args)
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    fmt = lambda x: io.fmt(x, args.precision)
    rows = [[a, fmt(stats.mean(R.column(a))), fmt(stats.stddev(R.column(a), args.ddof))] for a in R.assets]
    if args.weights is not None:
        if len(args.weights) != len(R.assets):
            raise ValidationError(f"{len(args.weights)} weights for {len(R.assets)} assets")
        port = portfolio_return_series(R, np.array(args.weights))
        rows.append(["portfolio", fmt(stats.mean(port)), fmt(stats.stddev(port, args.ddof))])
        _write_rows(
            out / "portfolio_returns.csv",
            ["date", "return"],
            [[d.isoformat(), fmt(v)] for d, v in zip(R.dates, port)],
        )
    _write_rows(out / "stats.csv", ["asset", "mean", "stddev"], rows)
    if R.shape[0] >= 2:
        cov = stats.covariance_matrix(R, args.ddof)
        _write_rows(out / "covariance.csv", ["asset", *R.assets],
                    [[a, *map(fmt, row)] for a, row in zip(R.assets, cov.matrix)])
        corr = stats.correlation_matrix(cov)
        _write_rows(out / "correlation.csv", ["asset", *R.assets],
                    [[a, *map(fmt, row)] for a, row in zip(R.assets, corr)])


def _model(args):
    R = _load_returns(args)
    return frontier_constants(R.means, stats.covariance_matrix(R), R.assets)


def cmd_frontier(args) -> None:
    f = _model(args)
    io.emit_frontier_report(f, args.out_dir, frontier_grid(f, args.points), args.precision)


def cmd_min_risk(args) -> None:
    f = _model(args)
    mr = min_risk_portfolio(f)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    fmt = lambda x: io.fmt(x, args.precision)
    _write_rows(
        args.out_dir / "min_risk.csv",
        ["asset", "weight", "percent"],
        [[a, fmt(w), fmt(100 * w)] for a, w in zip(f.assets, mr.allocation.weights)],
    )
    summary = {"r_min": mr.expected_return, "sigma_min": mr.risk}
    if args.precision is not None:
        summary = {k: round(v, args.precision) for k, v in summary.items()}
    (args.out_dir / "min_risk.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")


def cmd_backtest(args) -> None:
    series = io.ingest_prices(_require_input(args), args.locale)
    injected = None
    rule = Rule(args.rule)
    if args.injected_targets is not None:
        if rule is not Rule.MARKOWITZ:
            raise ValidationError("--injected-targets needs --rule markowitz")
        t_assets, injected = io.read_injected_targets(args.injected_targets, args.locale)
        ids = [s.asset_id for s in series]
        if t_assets != ids:
            raise ValidationError(f"target columns {t_assets} do not match price columns {ids}")
        rule = Rule.INJECTED
    cfg = StrategyConfig(
        rule=rule,
        initial_contribution=args.initial,
        monthly_contribution=args.monthly,
        warmup_months=args.warmup_months,
        start_date=args.start,
        end_date=args.end,
        naive_mode=NaiveMode(args.naive_mode),
        max_gap_days=args.max_gap_days,
    )
    state = run_backtest(series, cfg, injected)
    io.emit_backtest_report(state, args.out_dir, args.precision, name=f"backtest_{args.rule}")


def cmd_quota(args) -> None:
    dates, returns, flows = io.read_quota_input(_require_input(args), args.locale)
    ledger = build_ledger(returns, flows, dates)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    io.write_quota_ledger(ledger, args.out_dir / "quota_ledger.csv", args.precision)
    fmt = lambda x: io.fmt(x, args.precision)
    row = [fmt(quota_return(ledger)), fmt(capital_return(ledger))]
    header = ["quota_return", "capital_return"]
    if len(ledger) > 2:
        _, risk, quotient = quota_performance(ledger, args.ddof)
        row += [fmt(risk), fmt(quotient)]
        header += ["risk", "performance_quotient"]
    _write_rows(args.out_dir / "quota_summary.csv", header, [row])


COMMANDS = {
    "stats": cmd_stats,
    "frontier": cmd_frontier,
    "min-risk": cmd_min_risk,
    "backtest": cmd_backtest,
    "quota": cmd_quota,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
