"""Sample autocorrelation, partial autocorrelation and cross-correlation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import AlignmentError, DegenerateSeries
from .series_core import TimeSeries

__all__ = ["CorrelogramResult", "acf", "pacf", "ccf", "durbin_levinson"]

BAND_Z = 1.96


@dataclass(frozen=True)
class CorrelogramResult:
    lags: np.ndarray
    coefficients: np.ndarray
    confidence_band: float
    n: int

    def outside_band(self) -> np.ndarray:
        return np.abs(self.coefficients) > self.confidence_band

    def first_lag_inside_band(self) -> int | None:
        """Smallest positive lag whose coefficient falls inside the band."""
        pos = self.lags > 0
        inside = ~self.outside_band() & pos
        if not inside.any():
            return None
        return int(self.lags[np.argmax(inside)])


def _centered(s, label="series"):
    v = s.values if isinstance(s, TimeSeries) else np.asarray(s, dtype=float)
    if v.size == 0 or np.all(v == v[0]):
        raise DegenerateSeries(f"{label} is constant; correlation undefined")
    x = v - v.mean()
    ss = float(x @ x)
    if ss <= 0.0:
        raise DegenerateSeries(f"{label} has zero variance")
    return x, ss


def _autocov_sums(x: np.ndarray, max_lag: int) -> np.ndarray:
    # sum_t x_t x_{t-k} for k = 0..max_lag
    full = signal.correlate(x, x, mode="full", method="auto")
    mid = x.size - 1
    return full[mid : mid + max_lag + 1]


def acf(s, max_lag: int) -> CorrelogramResult:
    """Biased (divide-by-n) sample autocorrelation for lags 0..max_lag."""
    x, ss = _centered(s)
    n = x.size
    if not 0 < max_lag < n:
        raise ValueError(f"max_lag must be in [1, {n - 1}], got {max_lag}")
    sums = _autocov_sums(x, max_lag)
    rho = np.clip(sums / ss, -1.0, 1.0)
    rho[0] = 1.0
    return CorrelogramResult(np.arange(max_lag + 1), rho, BAND_Z / np.sqrt(n), n)


def durbin_levinson(rho: np.ndarray, max_lag: int) -> np.ndarray:
    """Partial autocorrelations phi_kk, k = 1..max_lag, from an ACF.

    ``rho[0]`` must be 1. Returns an array of length ``max_lag``.
    """
    out = np.zeros(max_lag)
    phi = np.zeros(max_lag + 1)
    v = 1.0
    for k in range(1, max_lag + 1):
        num = rho[k] - phi[1:k] @ rho[k - 1 : 0 : -1]
        if v <= 0.0:
            raise DegenerateSeries("autocorrelation sequence is not positive definite")
        a = num / v
        prev = phi[1:k].copy()
        phi[1:k] = prev - a * prev[::-1]
        phi[k] = a
        v *= 1.0 - a * a
        out[k - 1] = a
    return out


def pacf(s, max_lag: int) -> CorrelogramResult:
    """Partial autocorrelations for lags 1..max_lag by Durbin-Levinson."""
    x, ss = _centered(s)
    n = x.size
    if not 0 < max_lag < n / 2:
        raise ValueError(f"max_lag must be in [1, n/2), got {max_lag} for n={n}")
    rho = np.clip(_autocov_sums(x, max_lag) / ss, -1.0, 1.0)
    rho[0] = 1.0
    coefs = np.clip(durbin_levinson(rho, max_lag), -1.0, 1.0)
    return CorrelogramResult(np.arange(1, max_lag + 1), coefs, BAND_Z / np.sqrt(n), n)


def ccf(a, b, max_lag: int) -> CorrelogramResult:
    """Cross-correlation ``corr(a_t, b_{t+k})`` for k = -max_lag..max_lag.

    A positive peak lag means ``b`` follows ``a``.
    """
    if isinstance(a, TimeSeries) and isinstance(b, TimeSeries):
        if not a.aligned_with(b):
            raise AlignmentError(f"{a.name!r} and {b.name!r} have different dates")
    xa, ssa = _centered(a, "first series")
    xb, ssb = _centered(b, "second series")
    n = xa.size
    if xb.size != n:
        raise AlignmentError("series lengths differ")
    if not 0 < max_lag < n:
        raise ValueError(f"max_lag must be in [1, {n - 1}], got {max_lag}")
    # full[mid + k] = sum_t xb_{t+k} xa_t
    full = signal.correlate(xb, xa, mode="full", method="auto")
    mid = n - 1
    coefs = full[mid - max_lag : mid + max_lag + 1] / np.sqrt(ssa * ssb)
    return CorrelogramResult(
        np.arange(-max_lag, max_lag + 1),
        np.clip(coefs, -1.0, 1.0),
        BAND_Z / np.sqrt(n),
        n,
    )
