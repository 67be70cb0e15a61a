"""Independent reference computations used to validate the engine.

None of these import engine internals; each takes a deliberately different
route to the same quantity (dense linear algebra instead of filtering,
continued fractions instead of library CDFs, normal equations instead of QR).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import linalg


# ARMA autocovariance and dense Gaussian log-density

def psi_weights(ar, ma, m: int) -> np.ndarray:
    """MA(infinity) weights psi_0..psi_m of 1 + sum ma_j z^j over 1 - sum ar_i z^i."""
    ar = np.asarray(ar, float)
    ma = np.asarray(ma, float)
    psi = np.zeros(m + 1)
    psi[0] = 1.0
    for j in range(1, m + 1):
        acc = ma[j - 1] if j <= ma.size else 0.0
        for i in range(1, min(j, ar.size) + 1):
            acc += ar[i - 1] * psi[j - i]
        psi[j] = acc
    return psi


def arma_autocovariance(ar, ma, sigma2: float, nlags: int) -> np.ndarray:
    """gamma(0..nlags) by solving the linear autocovariance equations exactly."""
    ar = np.asarray(ar, float)
    ma = np.asarray(ma, float)
    p, q = ar.size, ma.size
    theta = np.r_[1.0, ma]
    psi = psi_weights(ar, ma, q)
    rhs = np.array([sigma2 * sum(theta[j] * psi[j - k] for j in range(k, q + 1)) for k in range(max(p, q) + 1)])

    # k = 0..p: gamma(k) - sum_i ar_i gamma(|k - i|) = rhs_k, unknowns gamma(0..p)
    a = np.zeros((p + 1, p + 1))
    for k in range(p + 1):
        a[k, k] += 1.0
        for i in range(1, p + 1):
            a[k, abs(k - i)] -= ar[i - 1]
    gamma = np.zeros(nlags + 1)
    g0 = np.linalg.solve(a, rhs[: p + 1])
    gamma[: min(p, nlags) + 1] = g0[: min(p, nlags) + 1]
    for k in range(p + 1, nlags + 1):
        gamma[k] = sum(ar[i - 1] * gamma[k - i] for i in range(1, p + 1))
        if k <= q:
            gamma[k] += rhs[k]
    return gamma


def dense_arma_loglik(y, ar, ma, mean: float, sigma2: float) -> float:
    """Exact Gaussian log-density using the explicit n x n Toeplitz covariance."""
    y = np.asarray(y, float) - mean
    n = y.size
    cov = linalg.toeplitz(arma_autocovariance(ar, ma, sigma2, n - 1))
    c, low = linalg.cho_factor(cov, lower=True)
    logdet = 2.0 * np.sum(np.log(np.diag(c)))
    quad = float(y @ linalg.cho_solve((c, low), y))
    return -0.5 * (n * math.log(2.0 * math.pi) + logdet + quad)


# Regularized incomplete beta by continued fraction (modified Lentz)

def _betacf(a: float, b: float, x: float, itmax=10000, eps=1e-15) -> float:
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c, d = 1.0, 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, itmax + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise RuntimeError("continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    lbt = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(lbt) * _betacf(a, b, x) / a
    return 1.0 - math.exp(lbt) * _betacf(b, a, 1.0 - x) / b


def t_cdf(t: float, df: float) -> float:
    tail = 0.5 * betainc(0.5 * df, 0.5, df / (df + t * t))
    return 1.0 - tail if t > 0 else tail


def t_two_sided_p(t: float, df: float) -> float:
    return betainc(0.5 * df, 0.5, df / (df + t * t))


def f_cdf(f: float, d1: float, d2: float) -> float:
    if f <= 0:
        return 0.0
    return betainc(0.5 * d1, 0.5 * d2, d1 * f / (d1 * f + d2))


def f_sf(f: float, d1: float, d2: float) -> float:
    if f <= 0:
        return 1.0
    return betainc(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f))


def _bisect(fun, target, lo, hi, tol=1e-12):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if fun(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def t_quantile(prob: float, df: float) -> float:
    return _bisect(lambda t: t_cdf(t, df), prob, -50.0, 50.0)


def f_quantile(prob: float, d1: float, d2: float) -> float:
    return _bisect(lambda f: f_cdf(f, d1, d2), prob, 0.0, 100.0)


# Least squares by normal equations

def normal_equations_ols(y, x):
    y = np.asarray(y, float)
    x = np.asarray(x, float)
    beta = np.linalg.solve(x.T @ x, x.T @ y)
    resid = y - x @ beta
    rss = float(resid @ resid)
    s2 = rss / (x.shape[0] - x.shape[1])
    se = np.sqrt(np.diag(s2 * np.linalg.inv(x.T @ x)))
    return beta, se, rss


def adf_bruteforce(values, k: int):
    """ADF t-ratio from a row-by-row assembled design and normal equations."""
    v = np.asarray(values, float)
    n = v.size
    dv = [v[i] - v[i - 1] for i in range(1, n)]
    rows, resp = [], []
    for t in range(k, len(dv)):
        row = [1.0, float(t + 1), v[t]]
        row += [dv[t - j] for j in range(1, k + 1)]
        rows.append(row)
        resp.append(dv[t])
    beta, se, _ = normal_equations_ols(resp, np.array(rows))
    return beta[2] / se[2], beta


# Simple sample statistics

def two_pass_mean(x) -> float:
    x = [float(v) for v in x]
    m = sum(x) / len(x)
    return m + sum(v - m for v in x) / len(x)


def sample_sd(x) -> float:
    x = [float(v) for v in x]
    m = sum(x) / len(x)
    return math.sqrt(sum((v - m) ** 2 for v in x) / (len(x) - 1))


def johansen_canonical(y, k: int, constant=False):
    """Trace statistics from squared canonical correlations of the residual blocks.

    Residualization uses explicit normal equations and the canonical
    correlations come from an SVD of orthonormal bases, a separate route from
    a generalized symmetric eigenproblem.
    """
    y = np.asarray(y, float)
    dy = np.diff(y, axis=0)
    z0 = dy[k - 1:]
    z1 = y[k - 1:-1]
    T = z0.shape[0]
    cols = [dy[k - 1 - i: dy.shape[0] - i] for i in range(1, k)]
    if constant:
        cols.append(np.ones((T, 1)))
    if cols:
        z = np.hstack(cols)
        proj = z @ np.linalg.solve(z.T @ z, z.T)
        r0 = z0 - proj @ z0
        r1 = z1 - proj @ z1
    else:
        r0, r1 = z0, z1
    q0, _ = np.linalg.qr(r0)
    q1, _ = np.linalg.qr(r1)
    rho = np.linalg.svd(q0.T @ q1, compute_uv=False)
    lam = np.sort(rho ** 2)[::-1]
    return [-T * np.sum(np.log(1 - lam[r:])) for r in range(2)], lam
