"""Pure-Python/numpy versions of the hot kernels in ``_core.pyx``.

Selected automatically when the compiled extension is unavailable, or when
``GINPROD_PURE_PYTHON=1`` is set.  Both implementations follow the same
arithmetic so results agree to a few ulps.
"""

import math

import numpy as np

EULER_GAMMA = 0.5772156649015329
_EPS = 2.220446049250313e-16
_RESCALE_HI = 1e150
_RESCALE_LO = 1e-150


def k01_scaled(z):
    """Return ``(exp(z) K_0(z), exp(z) K_1(z))`` for ``z > 0``."""
    if z <= 2.0:
        q = 0.25 * z * z
        lg = math.log(0.5 * z)
        # I0, I1 and the harmonic-number sums share one running term
        term0 = 1.0          # q^k / (k!)^2
        term1 = 1.0          # q^k / (k! (k+1)!)
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
        ez = math.exp(z)
        return k0 * ez, k1 * ez
    # Steed's continued fraction (Temme's CF2) at order zero
    b = 2.0 * (1.0 + z)
    d = 1.0 / b
    h = delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 10000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    h = a1 * h
    k0 = math.sqrt(math.pi / (2.0 * z)) / s
    k1 = k0 * (z + 0.5 - h) / z
    return k0, k1


def recurrence_eval(x, b, c, d):
    """Run ``P_{j+1} = (x - b_j) P_j - c_j P_{j-1} - d_j P_{j-2}`` from ``P_0 = 1``.

    Returns ``(sign, log|P_k|, P_k / P_k')`` per entry of ``x`` where ``k = len(b)``.
    Values are renormalised every step and the scale is tracked in log form.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    k = len(b)
    pm2 = np.zeros_like(x)
    pm1 = np.zeros_like(x)
    p = np.ones_like(x)
    dm2 = np.zeros_like(x)
    dm1 = np.zeros_like(x)
    dp = np.zeros_like(x)
    logscale = np.zeros_like(x)
    for j in range(k):
        xb = x - b[j]
        pn = xb * p - c[j] * pm1 - d[j] * pm2
        dn = p + xb * dp - c[j] * dm1 - d[j] * dm2
        pm2, pm1, p = pm1, p, pn
        dm2, dm1, dp = dm1, dp, dn
        s = np.abs(p) + np.abs(pm1) + np.abs(pm2)
        big = (s > _RESCALE_HI) | ((s < _RESCALE_LO) & (s > 0.0))
        if big.any():
            f = np.where(big, s, 1.0)
            logscale += np.log(f)
            inv = 1.0 / f
            p = p * inv
            pm1 = pm1 * inv
            pm2 = pm2 * inv
            dp = dp * inv
            dm1 = dm1 * inv
            dm2 = dm2 * inv
    sign = np.sign(p).astype(np.int8)
    with np.errstate(divide="ignore", invalid="ignore"):
        logabs = np.log(np.abs(p)) + logscale
        step = p / dp
    return sign, logabs, step
