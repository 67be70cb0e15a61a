"""Augmented Dickey-Fuller and Johansen trace tests.

The ADF p-value comes from two-way linear interpolation in the small-sample
Dickey-Fuller quantile table for the constant-plus-trend regression
(Fuller, 1976, Table 8.5.2; reproduced in Banerjee et al., 1993, Table 4.2).
Johansen critical values are the two-variable trace quantiles for the
specification without a restricted deterministic term, as tabulated by the
``urca`` R package (``ca.jo(..., ecdet = "none")``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import (
    AlignmentError,
    DegenerateSeries,
    InsufficientData,
    NumericalSingularity,
    SingularDesign,
)
from .regression import lag_matrix, ols
from .series_core import TimeSeries

__all__ = [
    "AdfResult",
    "JohansenResult",
    "adf_test",
    "adf_design",
    "df_pvalue",
    "johansen_trace",
    "DF_TABLE_VERSION",
    "JOHANSEN_CRITICAL_VALUES",
]

DF_TABLE_VERSION = "fuller1976-tau-tau-v1"

DF_SAMPLE_SIZES = np.array([25.0, 50.0, 100.0, 250.0, 500.0, 100000.0])
DF_PROBABILITIES = np.array([0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99])
# rows: sample size; columns: probability
DF_QUANTILES = -np.array(
    [
        [4.38, 3.95, 3.60, 3.24, 1.14, 0.80, 0.50, 0.15],
        [4.15, 3.80, 3.50, 3.18, 1.19, 0.87, 0.58, 0.24],
        [4.04, 3.73, 3.45, 3.15, 1.22, 0.90, 0.62, 0.28],
        [3.99, 3.69, 3.43, 3.13, 1.23, 0.92, 0.64, 0.31],
        [3.98, 3.68, 3.42, 3.13, 1.24, 0.93, 0.65, 0.32],
        [3.96, 3.66, 3.41, 3.12, 1.25, 0.94, 0.66, 0.33],
    ]
)
DF_QUANTILES.flags.writeable = False

JOHANSEN_LEVELS = (0.10, 0.05, 0.01)
# rank hypothesis -> (10%, 5%, 1%)
JOHANSEN_CRITICAL_VALUES = {
    "r=0": (15.66, 17.95, 23.52),
    "r<=1": (6.50, 8.18, 11.65),
}

# Largest acceptable condition number of a product-moment matrix.
MOMENT_COND_LIMIT = 1e12


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    p_value: float
    lag_order: int
    n_effective: int
    deterministic: str = "constant_and_trend"
    p_clamped: bool = False
    coefficients: np.ndarray | None = field(default=None, repr=False)

    def rejects(self, level: float = 0.05) -> bool:
        return self.p_value < level

    @property
    def p_label(self) -> str:
        if self.p_clamped and self.p_value <= DF_PROBABILITIES[0]:
            return "<0.01"
        if self.p_clamped and self.p_value >= DF_PROBABILITIES[-1]:
            return ">0.99"
        return f"{self.p_value:.4f}"


@dataclass(frozen=True)
class JohansenResult:
    trace_statistics: tuple[float, float]
    critical_values: tuple[tuple[float, float, float], tuple[float, float, float]]
    eigenvalues: tuple[float, float]
    lag_order: int
    n_effective: int
    deterministic: str = "none"
    hypotheses: tuple[str, str] = ("r=0", "r<=1")
    warnings: tuple[str, ...] = ()

    def rejects(self, rank: int = 0, level: float = 0.05) -> bool:
        idx = JOHANSEN_LEVELS.index(level)
        return self.trace_statistics[rank] > self.critical_values[rank][idx]


def df_pvalue(statistic: float, n: int, return_clamped: bool = False):
    """Dickey-Fuller p-value for the constant-plus-trend regression.

    Quantiles are first interpolated linearly in the sample size ``n``,
    then the probability is interpolated linearly in the statistic. Values
    outside the tabulated range are clamped to 0.01 / 0.99.
    """
    if n < DF_SAMPLE_SIZES[0]:
        raise InsufficientData(f"table starts at n=25, got n={n}")
    quantiles = np.array(
        [np.interp(n, DF_SAMPLE_SIZES, DF_QUANTILES[:, j]) for j in range(DF_PROBABILITIES.size)]
    )
    clamped = bool(statistic < quantiles[0] or statistic > quantiles[-1])
    p = float(np.interp(statistic, quantiles, DF_PROBABILITIES))
    return (p, clamped) if return_clamped else p


def default_adf_lag(n_obs: int) -> int:
    return int(math.trunc((n_obs - 1) ** (1.0 / 3.0)))


def adf_design(values: np.ndarray, lag_order: int):
    """Response and design matrix of the ADF regression.

    Columns: intercept, time trend, lagged level, then ``lag_order`` lagged
    differences. Returns ``(response, design)``.
    """
    x = np.asarray(values, dtype=float)
    dx = np.diff(x)
    n = dx.size
    k = lag_order
    rows = np.arange(k, n)
    response = dx[k:]
    cols = [np.ones(rows.size), rows + 1.0, x[k:n]]
    if k > 0:
        lags = lag_matrix(dx, k)
        cols.extend(lags.T)
    return response, np.column_stack(cols)


def adf_test(s: TimeSeries, lag_order: int | None = None) -> AdfResult:
    """Augmented Dickey-Fuller test with constant and linear trend.

    Regresses ``ds_t`` on a constant, a trend, ``s_{t-1}`` and ``lag_order``
    lagged differences; the statistic is the t-ratio on ``s_{t-1}``.
    The default lag order is ``trunc((n - 1) ** (1/3))``.
    """
    values = s.values if isinstance(s, TimeSeries) else np.asarray(s, dtype=float)
    n_obs = values.size
    k = default_adf_lag(n_obs) if lag_order is None else int(lag_order)
    if k < 0:
        raise ValueError("lag_order must be nonnegative")
    if n_obs < 25 + k:
        raise InsufficientData(f"ADF needs at least {25 + k} observations, got {n_obs}")
    if np.all(values == values[0]):
        raise DegenerateSeries("ADF regression undefined for a constant series")
    response, design = adf_design(values, k)
    try:
        fit = ols(response, design)
    except SingularDesign as exc:
        raise DegenerateSeries(f"singular ADF design: {exc}") from exc
    se = fit.std_errors[2]
    if not np.isfinite(se) or se <= 0.0:
        raise DegenerateSeries("ADF regression has a perfect fit")
    stat = float(fit.coefficients[2] / se)
    p, clamped = df_pvalue(stat, n_obs - 1, return_clamped=True)
    return AdfResult(
        statistic=stat,
        p_value=p,
        lag_order=k,
        n_effective=fit.n,
        p_clamped=clamped,
        coefficients=fit.coefficients,
    )


def _residualize(target: np.ndarray, regressors: np.ndarray | None) -> np.ndarray:
    if regressors is None or regressors.shape[1] == 0:
        return target
    coef, *_ = np.linalg.lstsq(regressors, target, rcond=None)
    return target - regressors @ coef


def _check_conditioning(m: np.ndarray, label: str):
    if not np.all(np.isfinite(m)):
        raise NumericalSingularity(f"{label} has non-finite entries")
    eig = np.linalg.eigvalsh(m)
    if eig[0] <= 0.0 or eig[-1] / eig[0] > MOMENT_COND_LIMIT:
        raise NumericalSingularity(f"{label} is (near) singular")


def johansen_trace(
    a: TimeSeries,
    b: TimeSeries,
    lag_order: int = 2,
    deterministic: str = "none",
) -> JohansenResult:
    """Johansen trace test for the cointegration rank of a bivariate system.

    The VECM ``dY_t = Pi Y_{t-1} + sum_{i<lag_order} G_i dY_{t-i} + e_t`` is
    concentrated on the short-run terms and the rank of ``Pi`` is read off
    the generalized eigenproblem ``|l S11 - S10 S00^-1 S01| = 0``.

    ``deterministic="none"`` uses no deterministic term at all;
    ``"constant"`` adds an unrestricted intercept to the short-run block.
    """
    if isinstance(a, TimeSeries) and isinstance(b, TimeSeries):
        if not a.aligned_with(b):
            raise AlignmentError(f"{a.name!r} and {b.name!r} have different dates")
    y = np.column_stack(
        [
            a.values if isinstance(a, TimeSeries) else np.asarray(a, float),
            b.values if isinstance(b, TimeSeries) else np.asarray(b, float),
        ]
    )
    if deterministic not in ("none", "constant"):
        raise ValueError(f"unknown deterministic term {deterministic!r}")
    K = int(lag_order)
    if K < 1:
        raise ValueError("lag_order must be at least 1")
    n_obs = y.shape[0]
    if n_obs < 10 * K:
        raise InsufficientData(f"need at least {10 * K} observations, got {n_obs}")

    dy = np.diff(y, axis=0)
    # rows t = K-1 .. n_obs-2 of dy (dy[t] = y[t+1] - y[t])
    z0 = dy[K - 1 :]
    z1_level = y[K - 1 : -1]
    T = z0.shape[0]
    short = [dy[K - 1 - i : dy.shape[0] - i] for i in range(1, K)]
    if deterministic == "constant":
        short.append(np.ones((T, 1)))
    zs = np.hstack(short) if short else None

    r0 = _residualize(z0, zs)
    r1 = _residualize(z1_level, zs)
    s00 = r0.T @ r0 / T
    s11 = r1.T @ r1 / T
    s01 = r0.T @ r1 / T
    _check_conditioning(s00, "S00")
    _check_conditioning(s11, "S11")

    m = s01.T @ np.linalg.solve(s00, s01)
    m = 0.5 * (m + m.T)
    try:
        lam = linalg.eigh(m, s11, eigvals_only=True)
    except linalg.LinAlgError as exc:
        raise NumericalSingularity(str(exc)) from exc
    lam = np.clip(np.sort(lam)[::-1], 0.0, 1.0 - 1e-15)
    logs = np.log1p(-lam)
    trace = tuple(float(-T * logs[r:].sum()) for r in range(2))
    return JohansenResult(
        trace_statistics=trace,
        critical_values=(JOHANSEN_CRITICAL_VALUES["r=0"], JOHANSEN_CRITICAL_VALUES["r<=1"]),
        eigenvalues=(float(lam[0]), float(lam[1])),
        lag_order=K,
        n_effective=T,
        deterministic=deterministic,
    )
