"""Pure-NumPy versions of the compiled kernels in ``_core.pyx``."""
import numpy as np

GROWTH_LIMIT = 1e12
OVERFLOW_LIMIT = 1e150


def goursat_march(q, q_half, kd, kd_half, h):
    n = len(q)
    h2 = h * h
    K = np.zeros((n, n))
    K[np.arange(n), np.arange(n)] = kd
    if n < 2:
        return K, True
    K[1, 0] = (2.0 * kd_half[1] + h2 / 8.0 * q_half[1] * kd_half[1]) / (1.0 - h2 * q[1] / 16.0)
    for i in range(2, n):
        kq, kr, ks = K[i - 1, i - 2], kd_half[i], kd_half[i - 1]
        rhs = kq + kr - ks + h2 / 8.0 * (q[i - 1] * kq + q_half[i] * kr + q_half[i - 1] * ks)
        K[i, i - 1] = rhs / (1.0 - h2 * q[i] / 8.0)
        j = np.arange(i - 1)
        jm = np.abs(j - 1)
        kb, kc, kdd, kcen = K[i - 1, j + 1], K[i - 1, jm], K[i - 2, j], K[i - 1, j]
        rhs = kb + kc - kdd + h2 * ((2.0 / 3.0) * q[i - 1] * kcen
                                    + (q[i - 1] * kb + q[i - 1] * kc + q[i - 2] * kdd) / 12.0)
        row = rhs / (1.0 - h2 * q[i] / 12.0)
        if not np.all(np.abs(row) < GROWTH_LIMIT):
            return K, False
        K[i, j] = row
    return K, True


def volterra_invert(KW):
    n = KW.shape[0]
    LW = np.zeros((n, n))
    for i in range(n):
        piv = 1.0 + KW[i, i]
        if i:
            LW[i, :i] = -(KW[i, :i] + KW[i, :i] @ LW[:i, :i]) / piv
        LW[i, i] = -KW[i, i] / piv
    return LW


def rk4_march(q_fine, lam, h, n_sub):
    lam = np.asarray(lam, dtype=float)
    n_k = len(lam)
    n = (len(q_fine) - 1) // (2 * n_sub) + 1
    hs = h / n_sub
    psi = np.empty((n, n_k))
    dpsi = np.empty((n, n_k))
    valid = np.ones(n_k, dtype=bool)
    y = np.ones(n_k)
    yp = np.zeros(n_k)
    psi[0], dpsi[0] = y, yp
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, n):
            for m in range(n_sub):
                base = 2 * ((i - 1) * n_sub + m)
                qa, qb, qc = q_fine[base] - lam, q_fine[base + 1] - lam, q_fine[base + 2] - lam
                k1, l1 = yp, qa * y
                k2, l2 = yp + 0.5 * hs * l1, qb * (y + 0.5 * hs * k1)
                k3, l3 = yp + 0.5 * hs * l2, qb * (y + 0.5 * hs * k2)
                k4, l4 = yp + hs * l3, qc * (y + hs * k3)
                y = y + hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                yp = yp + hs / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4)
            valid &= (np.abs(y) < OVERFLOW_LIMIT) & np.isfinite(yp)
            psi[i] = np.where(valid, y, np.nan)
            dpsi[i] = np.where(valid, yp, np.nan)
    return psi, dpsi, valid
