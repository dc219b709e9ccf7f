import csv
import datetime as dt
from pathlib import Path

import numpy as np
import pytest

from mvport.stats import PriceSeries

DATA = Path(__file__).parent / "data"

# closes 09/04/2021 .. 16/04/2021
VALOR_DATES = [dt.date(2021, 4, d) for d in (9, 12, 13, 14, 15, 16)]
VALOR = {
    "IVVB11": [254.00, 256.54, 257.20, 254.29, 254.95, 255.00],
    "BOVA11": [113.01, 114.40, 114.67, 115.60, 116.20, 116.46],
    "BBAS3": [29.19, 29.55, 29.55, 29.60, 29.64, 29.77],
}

# minimum-risk targets (percent BOVA11) and the asset bought, 2018
PS_BOVA_2018 = [42.47, 41.31, 41.24, 42.81, 44.31, 38.02, 40.24, 40.77, 39.43, 41.45, 39.51, 41.69]
P_BOVA_2018 = [42.47, 44.86, 33.04, 47.85, 37.99, 41.88, 34.58, 43.88, 36.16, 42.58, 45.16, 41.12]
CHOSEN_2018 = ["IVVB11", "BOVA11", "IVVB11", "BOVA11", "IVVB11", "BOVA11",
               "IVVB11", "BOVA11", "IVVB11", "IVVB11", "BOVA11"]

# first-trading-day closes of 01/2018, implied by the opening 50/50 buy
OPENING_CLOSES = {"BOVA11": 73.86, "IVVB11": 93.67}


def valor_series():
    return [PriceSeries(a, VALOR_DATES, c) for a, c in VALOR.items()]


@pytest.fixture
def valor():
    return valor_series()


def load_monthly_tables():
    with (DATA / "monthly_tables.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for k in r:
            if k != "month":
                r[k] = float(r[k])
    return rows


@pytest.fixture(scope="session")
def monthly_tables():
    return load_monthly_tables()


def _busday(year, month, first=True):
    d = np.datetime64(f"{year:04d}-{month:02d}-01")
    if first:
        out = np.busday_offset(d, 0, roll="forward")
    else:
        nxt = (d.astype("datetime64[M]") + 1).astype("datetime64[D]")
        out = np.busday_offset(nxt, -1, roll="forward")
    return out.astype(dt.date)


def replay_series(rows=None):
    """Two-point-per-month prices rebuilt from the monthly tables.

    Each month gets a first-trading-day close (the previous month-end close,
    or the opening close for the first month) and a month-end close.
    """
    rows = rows if rows is not None else load_monthly_tables()
    dates, bova, ivvb = [], [], []
    prev = (OPENING_CLOSES["BOVA11"], OPENING_CLOSES["IVVB11"])
    for r in rows:
        y, m = (int(t) for t in r["month"].split("-"))
        dates += [_busday(y, m, True), _busday(y, m, False)]
        bova += [prev[0], r["close_BOVA11"]]
        ivvb += [prev[1], r["close_IVVB11"]]
        prev = (r["close_BOVA11"], r["close_IVVB11"])
    return [PriceSeries("BOVA11", dates, bova), PriceSeries("IVVB11", dates, ivvb)]


def targets_2018():
    return [(dt.date(2018, k + 1, 1), (ps, 100.0 - ps)) for k, ps in enumerate(PS_BOVA_2018)]


# PETR4 quota statement, February 2022
PETR4_DATES = [dt.date(2022, 2, d) for d in (1, 2, 3, 4, 7, 8, 9, 10, 11, 14, 15, 16, 17, 18, 21, 22, 23, 24, 25)]
PETR4_PRICES = [33.00, 32.52, 32.07, 32.63, 32.15, 31.83, 31.95, 32.44, 33.76, 33.00,
                32.48, 32.93, 32.80, 33.00, 33.85, 33.74, 34.22, 33.39, 34.00]
PETR4_FLOWS = [1000, 0, 0, 200, 0, 0, 0, 500, 0, 0, 0, 100, 100, -700, 0, 0, 0, 0, 0]
PETR4_QUOTA = [1.0000, 0.9855, 0.9718, 0.9888, 0.9742, 0.9645, 0.9682, 0.9830, 1.0230, 1.0000,
               0.9842, 0.9979, 0.9939, 1.0000, 1.0258, 1.0224, 1.0370, 1.0118, 1.0303]
PETR4_COUNT = [1000.00] * 3 + [1202.27] * 4 + [1710.90] * 4 + [1811.11, 1911.72] + [1211.72] * 6
PETR4_CAPITAL = [1000.00, 985.45, 971.82, 1188.79, 1171.30, 1159.64, 1164.01, 1681.87, 1750.30,
                 1710.90, 1683.94, 1807.27, 1900.14, 1211.72, 1242.93, 1238.89, 1256.52, 1226.04,
                 1248.44]


# acceptance reporting: one line per criterion at the end of the run

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    num = props["criterion"]
    entry = _RESULTS.setdefault(num, {"title": props.get("title", ""), "ok": True, "detail": []})
    entry["ok"] &= report.passed
    if props.get("detail"):
        entry["detail"].append(props["detail"])


@pytest.fixture(autouse=True)
def _criterion_props(request):
    m = request.node.get_closest_marker("criterion")
    if m is not None:
        request.node.user_properties.append(("criterion", m.args[0]))
        request.node.user_properties.append(("title", m.args[1]))


@pytest.fixture
def detail(request):
    """Attach a measured-value summary to the acceptance line."""
    def _set(text):
        request.node.user_properties.append(("detail", text))
    return _set


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        e = _RESULTS[num]
        status = "PASS" if e["ok"] else "FAIL"
        line = f"[{status}] criterion {num}: {e['title']}"
        if e["detail"]:
            line += " | " + "; ".join(e["detail"])
        terminalreporter.write_line(line)
