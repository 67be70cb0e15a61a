import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from tsdecouple.arima import ArimaOrder, simulate
from tsdecouple.correlation import acf, ccf, durbin_levinson, pacf
from tsdecouple.errors import AlignmentError, DegenerateSeries
from tsdecouple.series_core import TimeSeries

finite = st.floats(-1e4, 1e4, allow_nan=False, allow_infinity=False)
nonconstant = hnp.arrays(float, st.integers(6, 200), elements=finite).filter(
    lambda v: np.ptp(v) > 1e-6 * max(1.0, np.abs(v).max())
)


def ts(v, **kw):
    return TimeSeries.from_values(np.asarray(v, float), **kw)


def naive_acf(x, k):
    x = np.asarray(x, float) - np.mean(x)
    return float(np.sum(x[k:] * x[: x.size - k]) / np.sum(x * x))


def test_lag_zero_is_one():
    r = acf(ts(np.random.default_rng(0).normal(size=50)), 10)
    assert r.coefficients[0] == 1.0
    assert r.confidence_band == pytest.approx(1.96 / np.sqrt(50))


def test_matches_naive_definition():
    x = np.random.default_rng(1).normal(size=300).cumsum()
    r = acf(ts(x), 40)
    np.testing.assert_allclose(r.coefficients, [naive_acf(x, k) for k in range(41)], atol=1e-12)


def test_white_noise_band_coverage():
    # Monte-Carlo coverage, averaged over seeds
    cover = []
    for seed in range(100):
        r = acf(ts(np.random.default_rng(seed).normal(size=2000)), 50)
        cover.append((np.abs(r.coefficients[1:]) < 1.96 / np.sqrt(2000)).mean())
    assert np.mean(cover) >= 0.93


def test_ar1_pacf():
    s = simulate(ArimaOrder(1, 0, 0), [0.7, 0.0, 1.0], 5000, seed=3)
    r = pacf(s, 20)
    assert r.coefficients[0] == pytest.approx(0.7, abs=0.05)
    assert (np.abs(r.coefficients[1:]) < r.confidence_band).mean() >= 0.90


def test_white_noise_pacf():
    cover = []
    for seed in range(100):
        r = pacf(ts(np.random.default_rng(seed).normal(size=2000)), 50)
        cover.append((np.abs(r.coefficients) < r.confidence_band).mean())
    assert np.mean(cover) >= 0.93


def test_durbin_levinson_ar2_exact():
    # theoretical AR(2) acf: phi_22 equals the second coefficient, higher lags vanish
    a1, a2 = 0.5, 0.3
    rho = np.zeros(6)
    rho[0] = 1.0
    rho[1] = a1 / (1 - a2)
    for k in range(2, 6):
        rho[k] = a1 * rho[k - 1] + a2 * rho[k - 2]
    pk = durbin_levinson(rho, 5)
    assert pk[1] == pytest.approx(a2, abs=1e-12)
    np.testing.assert_allclose(pk[2:], 0.0, atol=1e-12)


def test_ccf_self_lag_zero():
    s = ts(np.random.default_rng(5).normal(size=100))
    r = ccf(s, s, 10)
    assert r.coefficients[r.lags == 0][0] == pytest.approx(1.0, abs=1e-12)


def test_ccf_shift_peak():
    rng = np.random.default_rng(6)
    a = rng.normal(size=1003)
    b = np.r_[np.zeros(3), a[:-3]] + 0.3 * rng.normal(size=1003)
    r = ccf(ts(a), ts(b), 20)
    assert r.lags[np.argmax(r.coefficients)] == 3


def test_ccf_misaligned():
    with pytest.raises(AlignmentError):
        ccf(ts([1.0, 2, 4, 3]), ts([1.0, 2, 4, 3], start="2010-01-01"), 1)


@pytest.mark.parametrize("fn", [lambda s: acf(s, 2), lambda s: pacf(s, 2), lambda s: ccf(s, s, 2)])
def test_constant_is_degenerate(fn):
    with pytest.raises(DegenerateSeries):
        fn(ts([3.0] * 10))


def test_pacf_lag_limit():
    with pytest.raises(ValueError):
        pacf(ts(np.arange(10.0) ** 2), 5)


def test_first_lag_inside_band():
    x = np.cumsum(np.random.default_rng(7).normal(size=500))
    r = acf(ts(x), 400)
    k = r.first_lag_inside_band()
    assert k is not None and k > 1
    assert np.all(np.abs(r.coefficients[1:k]) > r.confidence_band)


# properties

@settings(max_examples=100)
@given(nonconstant)
def test_acf_time_reversal(x):
    k = min(10, x.size - 1)
    np.testing.assert_allclose(acf(ts(x), k).coefficients, acf(ts(x[::-1]), k).coefficients, atol=1e-12)


@settings(max_examples=100)
@given(nonconstant, st.integers(0, 2**31))
def test_ccf_antisymmetry(a, seed):
    b = np.random.default_rng(seed).normal(size=a.size)
    k = min(8, a.size - 1)
    ab = ccf(ts(a), ts(b), k).coefficients
    ba = ccf(ts(b), ts(a), k).coefficients
    np.testing.assert_allclose(ab, ba[::-1], atol=1e-12)


@settings(max_examples=100)
@given(nonconstant)
def test_pacf_lag1_equals_acf_lag1(x):
    k = (x.size - 1) // 2
    assume(k >= 1)
    assert pacf(ts(x), k).coefficients[0] == acf(ts(x), k).coefficients[1]


@settings(max_examples=100)
@given(nonconstant)
def test_coefficients_bounded(x):
    n = x.size
    for r in (acf(ts(x), n - 1), pacf(ts(x), (n - 1) // 2), ccf(ts(x), ts(x[::-1]), n - 1)):
        assert np.all(np.abs(r.coefficients) <= 1.0)
