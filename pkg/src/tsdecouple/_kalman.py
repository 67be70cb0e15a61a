"""Compiled Kalman filter for a zero-mean ARMA process in companion form."""

import numpy as np
from numba import njit


@njit(cache=True)
def arma_filter_sums(y, phi, theta, p0):
    """Run the filter with unit innovation variance.

    ``phi`` and ``theta`` are padded to the state dimension ``r``
    (``theta`` to ``r - 1``). Returns ``(sum log F_t, sum v_t^2 / F_t)``;
    both are NaN if a prediction variance turns nonpositive.
    """
    n = y.shape[0]
    r = p0.shape[0]
    a = np.zeros(r)
    P = p0.copy()
    Rv = np.zeros(r)
    Rv[0] = 1.0
    for i in range(1, r):
        Rv[i] = theta[i - 1]
    M = np.zeros((r, r))
    Pn = np.zeros((r, r))
    K = np.zeros(r)
    an = np.zeros(r)
    sum_log = 0.0
    sum_sq = 0.0
    steady = False
    F = 1.0
    for t in range(n):
        if not steady:
            F = P[0, 0]
            if F <= 0.0:
                return np.nan, np.nan
        v = y[t] - a[0]
        sum_log += np.log(F)
        sum_sq += v * v / F
        if not steady:
            # M = T P
            for i in range(r):
                for j in range(r):
                    m = phi[i] * P[0, j]
                    if i + 1 < r:
                        m += P[i + 1, j]
                    M[i, j] = m
            for i in range(r):
                K[i] = M[i, 0] / F
            # Pn = M T' + R R' - K K' F
            diff = 0.0
            for i in range(r):
                for j in range(r):
                    val = M[i, 0] * phi[j]
                    if j + 1 < r:
                        val += M[i, j + 1]
                    val += Rv[i] * Rv[j] - K[i] * K[j] * F
                    d = abs(val - P[i, j])
                    if d > diff:
                        diff = d
                    Pn[i, j] = val
            for i in range(r):
                for j in range(r):
                    P[i, j] = Pn[i, j]
            if diff < 1e-13 * max(1.0, abs(P[0, 0])):
                steady = True
                F = P[0, 0]
        a0 = a[0]
        for i in range(r):
            nxt = phi[i] * a0 + K[i] * v
            if i + 1 < r:
                nxt += a[i + 1]
            an[i] = nxt
        for i in range(r):
            a[i] = an[i]
    return sum_log, sum_sq
