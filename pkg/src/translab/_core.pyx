# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels.  Signatures and results match ``translab._fallback``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, isfinite

cnp.import_array()

cdef double GROWTH_LIMIT = 1e12
cdef double OVERFLOW_LIMIT = 1e150


def goursat_march(const double[::1] q, const double[::1] q_half,
                  const double[::1] kd, const double[::1] kd_half, double h):
    cdef Py_ssize_t n = q.shape[0]
    cdef Py_ssize_t i, j, jm
    cdef double h2 = h * h, kq, kr, ks, rhs, kb, kc, kdd, kcen, v
    K_arr = np.zeros((n, n))
    cdef double[:, ::1] K = K_arr
    for i in range(n):
        K[i, i] = kd[i]
    if n < 2:
        return K_arr, True
    K[1, 0] = (2.0 * kd_half[1] + h2 / 8.0 * q_half[1] * kd_half[1]) / (1.0 - h2 * q[1] / 16.0)
    for i in range(2, n):
        kq = K[i - 1, i - 2]
        kr = kd_half[i]
        ks = kd_half[i - 1]
        rhs = kq + kr - ks + h2 / 8.0 * (q[i - 1] * kq + q_half[i] * kr + q_half[i - 1] * ks)
        K[i, i - 1] = rhs / (1.0 - h2 * q[i] / 8.0)
        for j in range(i - 1):
            jm = j - 1 if j > 0 else 1
            kb = K[i - 1, j + 1]
            kc = K[i - 1, jm]
            kdd = K[i - 2, j]
            kcen = K[i - 1, j]
            rhs = kb + kc - kdd + h2 * ((2.0 / 3.0) * q[i - 1] * kcen
                                        + (q[i - 1] * kb + q[i - 1] * kc + q[i - 2] * kdd) / 12.0)
            v = rhs / (1.0 - h2 * q[i] / 12.0)
            if not (fabs(v) < GROWTH_LIMIT):
                return K_arr, False
            K[i, j] = v
    return K_arr, True


def volterra_invert(const double[:, ::1] KW):
    """Return ``LW`` lower triangular with ``(I + KW)(I + LW) = I``.

    Row ``i`` accumulates ``KW[i, s] * LW[s, :]`` over earlier rows ``s``,
    so the inner loop runs along contiguous memory.
    """
    cdef Py_ssize_t n = KW.shape[0]
    cdef Py_ssize_t i, j, s
    cdef double a, piv
    LW_arr = np.zeros((n, n))
    cdef double[:, ::1] LW = LW_arr
    for i in range(n):
        piv = 1.0 + KW[i, i]
        for j in range(i):
            LW[i, j] = KW[i, j]
        for s in range(i):
            a = KW[i, s]
            if a != 0.0:
                for j in range(s + 1):
                    LW[i, j] += a * LW[s, j]
        for j in range(i):
            LW[i, j] = -LW[i, j] / piv
        LW[i, i] = -KW[i, i] / piv
    return LW_arr


def rk4_march(const double[::1] q_fine, const double[::1] lam, double h, int n_sub):
    """Integrate ``psi'' = (q - lam) psi``, ``psi(0)=1``, ``psi'(0)=0`` per column.

    ``q_fine`` holds q on the half-substep lattice: ``2*n_sub*(n-1) + 1`` values.
    """
    cdef Py_ssize_t n_k = lam.shape[0]
    cdef Py_ssize_t n = (q_fine.shape[0] - 1) // (2 * n_sub) + 1
    cdef Py_ssize_t i, m, j, base
    cdef double hs = h / n_sub, y, yp, k1, k2, k3, k4, l1, l2, l3, l4, qa, qb, qc, lj
    psi_arr = np.empty((n, n_k))
    dpsi_arr = np.empty((n, n_k))
    valid_arr = np.ones(n_k, dtype=np.uint8)
    cdef double[:, ::1] psi = psi_arr
    cdef double[:, ::1] dpsi = dpsi_arr
    cdef unsigned char[::1] valid = valid_arr
    for j in range(n_k):
        y = 1.0
        yp = 0.0
        lj = lam[j]
        psi[0, j] = 1.0
        dpsi[0, j] = 0.0
        for i in range(1, n):
            if valid[j]:
                for m in range(n_sub):
                    base = 2 * ((i - 1) * n_sub + m)
                    qa = q_fine[base] - lj
                    qb = q_fine[base + 1] - lj
                    qc = q_fine[base + 2] - lj
                    k1 = yp
                    l1 = qa * y
                    k2 = yp + 0.5 * hs * l1
                    l2 = qb * (y + 0.5 * hs * k1)
                    k3 = yp + 0.5 * hs * l2
                    l3 = qb * (y + 0.5 * hs * k2)
                    k4 = yp + hs * l3
                    l4 = qc * (y + hs * k3)
                    y = y + hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                    yp = yp + hs / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4)
                if not (fabs(y) < OVERFLOW_LIMIT and isfinite(yp)):
                    valid[j] = 0
            if valid[j]:
                psi[i, j] = y
                dpsi[i, j] = yp
            else:
                psi[i, j] = np.nan
                dpsi[i, j] = np.nan
    return psi_arr, dpsi_arr, valid_arr.astype(bool)
