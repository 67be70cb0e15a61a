"""Examples that need the committed daily index histories."""

from pathlib import Path

import numpy as np
import pytest

from tsdecouple.arima import ArimaOrder, fit
from tsdecouple.correlation import acf, ccf, pacf
from tsdecouple.hypothesis import INTERVALS, granger, leading_indicator_ftest, split_by_periods
from tsdecouple.ingest import align_and_clean, parse_quote_csv
from tsdecouple.series_core import difference, summarize
from tsdecouple.unit_root import adf_test

FIXTURES = Path(__file__).parent / "fixtures"
TECH_CSV, NONTECH_CSV = FIXTURES / "NDXT.csv", FIXTURES / "NDXX.csv"

pytestmark = pytest.mark.skipif(
    not (TECH_CSV.exists() and NONTECH_CSV.exists()), reason="index history fixtures not present"
)


@pytest.fixture(scope="module")
def raw():
    return parse_quote_csv(TECH_CSV), parse_quote_csv(NONTECH_CSV)


@pytest.fixture(scope="module")
def pair(raw):
    return align_and_clean(*raw, ("y", "x"))


def test_row_counts(raw, pair):
    tech, _ = raw
    assert (len(tech), tech.missing) == (4277, 3)
    assert len(pair.a) == len(pair.b) == 4274


def test_tech_summary(pair):
    s = summarize(pair.a)
    for got, want in ((s.min, 525.90), (s.mean, 3029.00), (s.max, 9855.40), (s.sd, 2330.62)):
        assert got == pytest.approx(want, abs=0.5)


def test_nontech_summary(pair):
    # the published mean disagrees with its own quartiles, so it is not checked
    s = summarize(pair.b)
    for got, want in ((s.min, 561), (s.max, 5360), (s.sd, 1283)):
        assert got == pytest.approx(want, abs=0.5)


def test_tech_acf_slow_decay(pair):
    k = acf(pair.a, 1500).first_lag_inside_band()
    assert k is None or k > 800


def test_nontech_pacf_first_lag(pair):
    r = pacf(pair.b, 50)
    assert r.coefficients[0] > 0.99


def test_ccf_lag_1000(pair):
    r = ccf(pair.a, pair.b, 1000)
    assert r.coefficients[r.lags == 1000][0] > 0.5


def test_adf_tech(pair):
    lev, dif = adf_test(pair.a), adf_test(difference(pair.a))
    assert lev.statistic == pytest.approx(-2.11, abs=0.05)
    assert lev.p_value == pytest.approx(0.53, abs=0.03)
    assert dif.statistic == pytest.approx(-16.824, abs=0.2) and dif.p_label == "<0.01"


def test_tech_313_fit(pair):
    f = fit(pair.a, ArimaOrder(3, 1, 3))
    assert f.converged and np.isfinite(f.aicc)


def test_periods_cover_everything(pair):
    dy = difference(pair.a)
    slices = split_by_periods(dy, INTERVALS)
    assert sum(len(s.series) for s in slices) == len(dy)
    covid = next(s for s in slices if s.period.label == "Covid")
    if np.datetime64("2020-01-20") in dy.dates:
        assert covid.series.dates[0] == np.datetime64("2020-01-20")


def test_leading_indicator_magnitude(pair):
    dy, dx = difference(pair.a), difference(pair.b)
    f = leading_indicator_ftest(dx, dy, 10)
    assert (f.df1, f.df2) == (10, 4252)
    assert 100 <= f.statistic <= 10_000 and f.p_value < 0.001


def test_granger_both_directions(pair):
    dy, dx = difference(pair.a), difference(pair.b)
    assert all(g.rejects(0.01) for g in granger(dy, dx, 10))
