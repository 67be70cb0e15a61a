"""Least squares by Householder QR.

Kept separate from :mod:`tsdecouple.hypothesis` because the unit-root tests
need it as well.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import SingularDesign

__all__ = ["RegressionFit", "ols", "lag_matrix"]

# Relative pivot below which a (unit-norm) column counts as collinear.
RANK_TOL = 1e-10


@dataclass(frozen=True)
class RegressionFit:
    coefficients: np.ndarray
    residuals: np.ndarray
    rss: float
    n: int
    k: int
    std_errors: np.ndarray

    @property
    def sigma2(self) -> float:
        return self.rss / (self.n - self.k) if self.n > self.k else float("nan")

    @property
    def t_values(self) -> np.ndarray:
        return self.coefficients / self.std_errors


def ols(response, design) -> RegressionFit:
    """Solve ``min ||y - X b||`` through a thin QR factorization of ``X``.

    Columns are normalized before factorizing so the rank check does not
    depend on the units of individual regressors.
    """
    y = np.asarray(response, dtype=float)
    X = np.asarray(design, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if y.shape != (n,):
        raise ValueError(f"response has shape {y.shape}, design has {n} rows")
    if n < k:
        raise SingularDesign(f"{n} rows cannot identify {k} coefficients")
    norms = np.linalg.norm(X, axis=0)
    if np.any(norms == 0.0) or not np.all(np.isfinite(norms)):
        raise SingularDesign("design has an all-zero or non-finite column")
    q, r = np.linalg.qr(X / norms)
    diag = np.abs(np.diag(r))
    if diag.min() < RANK_TOL:
        raise SingularDesign(
            f"design is rank deficient (column {int(diag.argmin())} is collinear)"
        )
    scaled = solve_triangular(r, q.T @ y)
    beta = scaled / norms
    resid = y - X @ beta
    rss = float(resid @ resid)
    if n > k:
        rinv = solve_triangular(r, np.eye(k))
        xtx_inv_diag = np.einsum("ij,ij->i", rinv, rinv) / norms**2
        se = np.sqrt(rss / (n - k) * xtx_inv_diag)
    else:
        se = np.full(k, np.nan)
    return RegressionFit(beta, resid, rss, n, k, se)


def lag_matrix(x: np.ndarray, lags: int) -> np.ndarray:
    """Columns ``x_{t-1}, ..., x_{t-lags}`` for ``t = lags .. len(x)-1``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    return np.column_stack([x[lags - i : n - i] for i in range(1, lags + 1)])
