# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: order-0/1 Macdonald functions and the scaled
four-term recurrence used for polynomial evaluation and zero refinement.

Mirrors ``_fallback.py`` operation for operation.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, M_PI, exp, fabs, log, sqrt

cnp.import_array()

cdef double EULER_GAMMA = 0.5772156649015329
cdef double _EPS = 2.220446049250313e-16
cdef double _RESCALE_HI = 1e150
cdef double _RESCALE_LO = 1e-150


cpdef tuple k01_scaled(double z):
    """Return ``(exp(z) K_0(z), exp(z) K_1(z))`` for ``z > 0``."""
    cdef double q, lg, term0, term1, i0, i1s, s0, s1, hk, k0, k1, i1, ez
    cdef double b, d, h, delh, q1, q2, a1, qq, c, a, s, qnew, dels
    cdef int k, i
    if z <= 2.0:
        q = 0.25 * z * z
        lg = log(0.5 * z)
        term0 = 1.0
        term1 = 1.0
        i0 = 1.0
        i1s = 1.0
        s0 = 0.0
        s1 = (-EULER_GAMMA) + (1.0 - EULER_GAMMA)
        hk = 0.0
        k = 0
        while True:
            k += 1
            term0 *= q / (k * k)
            term1 *= q / (k * (k + 1))
            hk += 1.0 / k
            i0 += term0
            i1s += term1
            s0 += hk * term0
            s1 += (2.0 * (hk - EULER_GAMMA) + 1.0 / (k + 1)) * term1
            if term0 < _EPS * 1e-3 * i0 and k > 2:
                break
        k0 = -(lg + EULER_GAMMA) * i0 + s0
        i1 = 0.5 * z * i1s
        k1 = 1.0 / z + i1 * lg - 0.25 * z * s1
        ez = exp(z)
        return k0 * ez, k1 * ez
    b = 2.0 * (1.0 + z)
    d = 1.0 / b
    h = d
    delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25
    qq = a1
    c = a1
    a = -a1
    s = 1.0 + qq * delh
    for i in range(2, 10000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        qq += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = qq * delh
        s += dels
        if fabs(dels / s) < _EPS:
            break
    h = a1 * h
    k0 = sqrt(M_PI / (2.0 * z)) / s
    k1 = k0 * (z + 0.5 - h) / z
    return k0, k1


def recurrence_eval(x, b, c, d):
    """Run ``P_{j+1} = (x - b_j) P_j - c_j P_{j-1} - d_j P_{j-2}`` from ``P_0 = 1``.

    Returns ``(sign, log|P_k|, P_k / P_k')`` per entry of ``x``.
    """
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef const double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef const double[::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef Py_ssize_t m = xv.shape[0]
    cdef Py_ssize_t k = bv.shape[0]
    sign_arr = np.empty(m, dtype=np.int8)
    log_arr = np.empty(m, dtype=np.float64)
    step_arr = np.empty(m, dtype=np.float64)
    cdef signed char[::1] sg = sign_arr
    cdef double[::1] lg = log_arr
    cdef double[::1] st = step_arr
    cdef Py_ssize_t i, j
    cdef double xi, xb, p, pm1, pm2, dp, dm1, dm2, pn, dn, s, inv, L
    with nogil:
        for i in range(m):
            xi = xv[i]
            p = 1.0
            pm1 = 0.0
            pm2 = 0.0
            dp = 0.0
            dm1 = 0.0
            dm2 = 0.0
            L = 0.0
            for j in range(k):
                xb = xi - bv[j]
                pn = xb * p - cv[j] * pm1 - dv[j] * pm2
                dn = p + xb * dp - cv[j] * dm1 - dv[j] * dm2
                pm2 = pm1
                pm1 = p
                p = pn
                dm2 = dm1
                dm1 = dp
                dp = dn
                s = fabs(p) + fabs(pm1) + fabs(pm2)
                if s > _RESCALE_HI or (s < _RESCALE_LO and s > 0.0):
                    L += log(s)
                    inv = 1.0 / s
                    p = p * inv
                    pm1 = pm1 * inv
                    pm2 = pm2 * inv
                    dp = dp * inv
                    dm1 = dm1 * inv
                    dm2 = dm2 * inv
            if p > 0.0:
                sg[i] = 1
            elif p < 0.0:
                sg[i] = -1
            else:
                sg[i] = 0
            if p == 0.0:
                lg[i] = -INFINITY
            else:
                lg[i] = log(fabs(p)) + L
            st[i] = p / dp
    return sign_arr, log_arr, step_arr
