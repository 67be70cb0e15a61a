"""ARIMA(p, d, q) estimation by exact Gaussian maximum likelihood.

The ARMA part is cast in state-space (companion) form and the likelihood is
accumulated from the Kalman-filter innovations, starting from the
stationary state covariance. Estimation optimizes over partial
autocorrelations mapped through ``tanh`` so every trial point is stationary
and invertible.

Parameter vectors share one layout everywhere in this module::

    [ar_1 .. ar_p, ma_1 .. ma_q, intercept, sigma2]

The MA polynomial is ``1 + ma_1 z + ... + ma_q z^q``; the AR polynomial is
``1 - ar_1 z - ... - ar_p z^p``. ``intercept`` is the mean of the
differenced series and is held at zero during estimation when ``d >= 1``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize, signal

from ._kalman import arma_filter_sums
from .errors import (
    InsufficientData,
    NonConvergence,
    ParameterDomainError,
    SearchFailed,
)
from .series_core import TimeSeries
from .unit_root import adf_test

__all__ = [
    "ArimaOrder",
    "ArimaFit",
    "log_likelihood",
    "fit",
    "auto_order",
    "simulate",
    "constrain",
    "unconstrain",
]

logger = logging.getLogger(__name__)

MAX_SIMPLEX_ITER = 500
MAX_QUASI_NEWTON_ITER = 100
PARAM_TOL = 1e-8
# gradient of the mean log-likelihood (per observation) treated as stationary
GRAD_TOL = 1e-5
# order search discards fits with a root this close to the unit circle
ROOT_MARGIN = 1.01
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, order=True)
class ArimaOrder:
    p: int
    d: int
    q: int

    def __post_init__(self):
        for name in ("p", "d", "q"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @classmethod
    def parse(cls, text: str) -> "ArimaOrder":
        p, d, q = (int(x) for x in text.replace(" ", "").split(","))
        return cls(p, d, q)

    def __str__(self):
        return f"({self.p},{self.d},{self.q})"


@dataclass(frozen=True)
class ArimaFit:
    order: ArimaOrder
    ar_coefficients: np.ndarray
    ma_coefficients: np.ndarray
    intercept: float
    sigma2: float
    log_likelihood: float
    aicc: float
    converged: bool
    iterations: int
    n_used: int = 0
    include_mean: bool = True
    message: str = field(default="", compare=False)

    @property
    def params(self) -> np.ndarray:
        return np.concatenate(
            [self.ar_coefficients, self.ma_coefficients, [self.intercept, self.sigma2]]
        )

    @property
    def n_params(self) -> int:
        return self.order.p + self.order.q + int(self.include_mean) + 1


# --- reparameterization ---------------------------------------------------


def _pacf_to_poly(r: np.ndarray) -> np.ndarray:
    """Step-up recursion from partial autocorrelations to AR coefficients."""
    phi = np.zeros(0)
    for rk in r:
        phi = np.concatenate([phi - rk * phi[::-1], [rk]])
    return phi


def _poly_to_pacf(phi: np.ndarray) -> np.ndarray:
    """Step-down recursion, inverse of :func:`_pacf_to_poly`."""
    phi = np.asarray(phi, dtype=float).copy()
    k = phi.size
    r = np.zeros(k)
    for j in range(k - 1, -1, -1):
        rk = phi[j]
        if abs(rk) >= 1.0:
            raise ParameterDomainError("polynomial is outside the stationary region")
        r[j] = rk
        phi = (phi[:j] + rk * phi[:j][::-1]) / (1.0 - rk * rk)
    return r


def constrain(u, p: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Map an unconstrained vector to stationary AR and invertible MA coefficients."""
    u = np.asarray(u, dtype=float)
    ar = _pacf_to_poly(np.tanh(u[:p]))
    ma = -_pacf_to_poly(np.tanh(u[p : p + q]))
    return ar, ma


def unconstrain(ar, ma) -> np.ndarray:
    """Inverse of :func:`constrain`."""
    ru = _poly_to_pacf(np.asarray(ar, dtype=float))
    rv = _poly_to_pacf(-np.asarray(ma, dtype=float))
    return np.arctanh(np.concatenate([ru, rv]))


def _min_root_modulus(coefs: np.ndarray, sign: float) -> float:
    # polynomial 1 + sign * (c_1 z + ... + c_k z^k)
    coefs = np.asarray(coefs, dtype=float)
    nz = np.flatnonzero(coefs)
    if nz.size == 0:
        return math.inf
    poly = np.concatenate([[1.0], sign * coefs[: nz[-1] + 1]])
    return float(np.min(np.abs(np.roots(poly[::-1]))))


def check_domain(ar, ma) -> None:
    if _min_root_modulus(ar, -1.0) <= 1.0:
        raise ParameterDomainError(f"AR coefficients {list(ar)} are not stationary")
    if _min_root_modulus(ma, 1.0) <= 1.0:
        raise ParameterDomainError(f"MA coefficients {list(ma)} are not invertible")


# --- likelihood -----------------------------------------------------------


def _state_setup(ar: np.ndarray, ma: np.ndarray):
    p, q = ar.size, ma.size
    r = max(p, q + 1)
    phi = np.zeros(r)
    phi[:p] = ar
    theta = np.zeros(max(r - 1, 1))
    theta[:q] = ma
    T = np.zeros((r, r))
    T[:, 0] = phi
    T[np.arange(r - 1), np.arange(1, r)] = 1.0
    R = np.concatenate([[1.0], theta[: r - 1]])
    if r == 1:
        p0 = np.array([[1.0 / (1.0 - phi[0] ** 2)]])
    else:
        p0 = linalg.solve_discrete_lyapunov(T, np.outer(R, R))
        p0 = 0.5 * (p0 + p0.T)
    return phi, theta, p0


def _filter_sums(w: np.ndarray, ar: np.ndarray, ma: np.ndarray) -> tuple[float, float]:
    phi, theta, p0 = _state_setup(ar, ma)
    return arma_filter_sums(np.ascontiguousarray(w, dtype=float), phi, theta, p0)


def _split(params, p: int, q: int):
    params = np.asarray(params, dtype=float)
    if params.size != p + q + 2:
        raise ValueError(
            f"expected {p + q + 2} parameters [ar, ma, intercept, sigma2], got {params.size}"
        )
    return params[:p], params[p : p + q], float(params[p + q]), float(params[p + q + 1])


def _differenced(s, d: int) -> np.ndarray:
    v = s.values if isinstance(s, TimeSeries) else np.asarray(s, dtype=float)
    if d:
        if v.size <= d:
            raise InsufficientData(f"cannot difference {v.size} points {d} times")
        v = np.diff(v, n=d)
    return v


def log_likelihood(order: ArimaOrder, params, s) -> float:
    """Exact Gaussian log-likelihood of ``s`` under ARIMA ``order``.

    The series is differenced ``order.d`` times and the ARMA(p, q) likelihood
    is evaluated with the stationary initial state.
    """
    ar, ma, mu, sigma2 = _split(params, order.p, order.q)
    if not sigma2 > 0.0:
        raise ParameterDomainError("sigma2 must be positive")
    check_domain(ar, ma)
    w = _differenced(s, order.d) - mu
    sum_log, sum_sq = _filter_sums(w, ar, ma)
    if not np.isfinite(sum_log):
        raise ParameterDomainError("prediction variance became nonpositive")
    n = w.size
    return -0.5 * (n * (_LOG_2PI + math.log(sigma2)) + sum_log + sum_sq / sigma2)


def _profile(w, ar, ma):
    """Log-likelihood with sigma2 at its closed-form maximizer."""
    sum_log, sum_sq = _filter_sums(w, ar, ma)
    n = w.size
    if not np.isfinite(sum_log) or sum_sq <= 0.0:
        return -np.inf, np.nan
    sigma2 = sum_sq / n
    ll = -0.5 * (n * (_LOG_2PI + math.log(sigma2) + 1.0) + sum_log)
    return ll, sigma2


# --- estimation -----------------------------------------------------------


def _hannan_rissanen(w: np.ndarray, p: int, q: int):
    """Rough ARMA starting values from a long autoregression."""
    n = w.size
    x = w - w.mean()
    ar = np.zeros(p)
    ma = np.zeros(q)
    if p == 0 and q == 0:
        return ar, ma
    resid = x
    start = 0
    if q > 0:
        m = min(max(p, q) + 10, max(n // 20, 1))
        X = np.column_stack([x[m - i : n - i] for i in range(1, m + 1)])
        coef, *_ = np.linalg.lstsq(X, x[m:], rcond=None)
        resid = np.concatenate([np.zeros(m), x[m:] - X @ coef])
        start = m
    lo = start + max(p, q)
    cols = [x[lo - i : n - i] for i in range(1, p + 1)]
    cols += [resid[lo - j : n - j] for j in range(1, q + 1)]
    if n - lo <= p + q + 1:
        return ar, ma
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), x[lo:], rcond=None)
    return coef[:p], coef[p:]


def _start_vector(w, p, q):
    ar, ma = _hannan_rissanen(w, p, q)
    try:
        u = unconstrain(ar, ma)
        if np.all(np.abs(u) < 3.0):
            return u
    except ParameterDomainError:
        pass
    return np.zeros(p + q)


def fit(s, order: ArimaOrder, include_mean: bool | None = None, raise_on_failure: bool = False) -> ArimaFit:
    """Maximum-likelihood ARIMA fit.

    Nelder-Mead on the transformed parameters, then a BFGS polish. The
    intercept is estimated only when ``d == 0`` (unless overridden).
    Non-convergence yields ``converged=False``; with ``raise_on_failure``
    a :class:`NonConvergence` carrying the fit is raised instead.
    """
    if not isinstance(order, ArimaOrder):
        order = ArimaOrder(*order)
    p, d, q = order.p, order.d, order.q
    values = s.values if isinstance(s, TimeSeries) else np.asarray(s, dtype=float)
    if values.size < 10 * (p + q + 1) or values.size <= d + 1:
        raise InsufficientData(
            f"ARIMA{order} needs at least {10 * (p + q + 1)} points, got {values.size}"
        )
    if include_mean is None:
        include_mean = d == 0
    w = _differenced(values, d)
    n = w.size
    center = float(w.mean()) if include_mean else 0.0
    scale = float(w.std()) or 1.0
    k_arma = p + q

    def unpack(x):
        ar, ma = constrain(x[:k_arma], p, q)
        mu = center + scale * x[k_arma] if include_mean else 0.0
        return ar, ma, mu

    def objective(x):
        ar, ma, mu = unpack(x)
        ll, _ = _profile(w - mu, ar, ma)
        return -ll / n if np.isfinite(ll) else 1e10

    def gradient(x, h=1e-6):
        g = np.empty_like(x)
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = h
            g[i] = (objective(x + e) - objective(x - e)) / (2 * h)
        return g

    x0 = _start_vector(w, p, q)
    if include_mean:
        x0 = np.append(x0, 0.0)
    iterations = 0
    message = ""
    if x0.size == 0:
        x_best = x0
        converged = True
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            nm = optimize.minimize(
                objective,
                x0,
                method="Nelder-Mead",
                options={
                    "maxiter": MAX_SIMPLEX_ITER,
                    "xatol": PARAM_TOL,
                    "fatol": 1e-12,
                    "adaptive": x0.size > 4,
                },
            )
            qn = optimize.minimize(
                objective,
                nm.x,
                jac=gradient,
                method="BFGS",
                options={"maxiter": MAX_QUASI_NEWTON_ITER, "gtol": GRAD_TOL * 0.1},
            )
        iterations = int(nm.nit + qn.nit)
        x_best = qn.x if qn.fun <= nm.fun else nm.x
        gnorm = float(np.linalg.norm(gradient(x_best)))
        converged = bool(np.isfinite(gnorm) and gnorm < GRAD_TOL)
        message = f"simplex: {nm.message}; quasi-newton: {qn.message}; |grad|={gnorm:.2e}"

    ar, ma, mu = unpack(x_best)
    ll, sigma2 = _profile(w - mu, ar, ma)
    k = k_arma + int(include_mean) + 1
    aicc = -2.0 * ll + 2.0 * k * n / (n - k - 1) if n - k - 1 > 0 else math.inf
    result = ArimaFit(
        order=order,
        ar_coefficients=ar,
        ma_coefficients=ma,
        intercept=float(mu),
        sigma2=float(sigma2),
        log_likelihood=float(ll),
        aicc=float(aicc),
        converged=converged and np.isfinite(ll),
        iterations=iterations,
        n_used=n,
        include_mean=include_mean,
        message=message,
    )
    if not result.converged:
        logger.info("ARIMA%s did not converge: %s", order, message)
        if raise_on_failure:
            raise NonConvergence(f"ARIMA{order} did not converge ({message})", fit=result)
    return result


# --- order selection ------------------------------------------------------


def select_d(s, max_d: int = 2, level: float = 0.05) -> int:
    """Smallest number of differences after which the ADF test rejects."""
    values = s.values if isinstance(s, TimeSeries) else np.asarray(s, dtype=float)
    for d in range(max_d + 1):
        w = np.diff(values, n=d) if d else values
        if adf_test(w).rejects(level):
            return d
    return max_d


def auto_order(s, max_p: int = 5, max_q: int = 5, max_d: int = 2) -> ArimaOrder:
    """Pick ``d`` by repeated ADF testing, then ``(p, q)`` by stepwise AICc.

    Starting from the best of (0,0), (1,0), (0,1), (2,2), the search moves
    to the best neighbor one step away in ``p`` or ``q`` until none improves.
    Candidates whose fit fails to converge, or whose AR or MA polynomial has
    a root within ``ROOT_MARGIN`` of the unit circle, are skipped.
    """
    return auto_arima(s, max_p=max_p, max_q=max_q, max_d=max_d).order


def auto_arima(s, max_p: int = 5, max_q: int = 5, max_d: int = 2) -> ArimaFit:
    """As :func:`auto_order` but returns the selected fit."""
    values = s.values if isinstance(s, TimeSeries) else np.asarray(s, dtype=float)
    if values.size < 100:
        raise InsufficientData(f"order search needs at least 100 points, got {values.size}")
    d = select_d(values, max_d)
    tried: dict[tuple[int, int], ArimaFit | None] = {}

    def evaluate(p, q):
        if (p, q) in tried:
            return tried[(p, q)]
        try:
            res = fit(values, ArimaOrder(p, d, q), raise_on_failure=True)
            if (
                _min_root_modulus(res.ar_coefficients, -1.0) < ROOT_MARGIN
                or _min_root_modulus(res.ma_coefficients, 1.0) < ROOT_MARGIN
            ):
                raise ParameterDomainError("estimate lies on the unit-circle boundary")
        except (NonConvergence, InsufficientData, ParameterDomainError) as exc:
            logger.info("skipping ARIMA(%d,%d,%d): %s", p, d, q, exc)
            res = None
        tried[(p, q)] = res
        return res

    seeds = [(0, 0), (1, 0), (0, 1), (2, 2)]
    best = None
    for p, q in seeds:
        if p <= max_p and q <= max_q:
            res = evaluate(p, q)
            if res is not None and (best is None or res.aicc < best.aicc):
                best = res
    if best is None:
        raise SearchFailed("no starting candidate could be fitted")
    while True:
        p0, q0 = best.order.p, best.order.q
        improved = None
        for p, q in ((p0 + 1, q0), (p0 - 1, q0), (p0, q0 + 1), (p0, q0 - 1)):
            if not (0 <= p <= max_p and 0 <= q <= max_q) or (p, q) in tried:
                continue
            res = evaluate(p, q)
            if res is not None and res.aicc < (improved or best).aicc:
                improved = res
        if improved is None:
            return best
        best = improved


# --- simulation -----------------------------------------------------------


def simulate(order: ArimaOrder, params, n: int, seed: int, name: str = "simulated") -> TimeSeries:
    """Draw a Gaussian ARIMA path of length ``n``.

    ``10 * (p + q + 1)`` burn-in points are discarded before integrating
    ``d`` times.
    """
    if not isinstance(order, ArimaOrder):
        order = ArimaOrder(*order)
    ar, ma, mu, sigma2 = _split(params, order.p, order.q)
    if not sigma2 > 0.0:
        raise ParameterDomainError("sigma2 must be positive")
    check_domain(ar, ma)
    if n < 1:
        raise ValueError("n must be positive")
    burn = 10 * (order.p + order.q + 1)
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(n + burn) * math.sqrt(sigma2)
    w = signal.lfilter(np.r_[1.0, ma], np.r_[1.0, -ar], e)[burn:] + mu
    for _ in range(order.d):
        w = np.cumsum(w)
    return TimeSeries.from_values(w, name)
