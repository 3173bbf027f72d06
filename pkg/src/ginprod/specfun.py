"""Macdonald functions K_nu, the rho family and the two-point weight.

``rho_g(x) = 2 x^{g/2} K_g(2 sqrt(x))`` is the Mellin-friendly wrapper of
``K_g``; its moments are ``int_0^inf x^m rho_k(x) dx = m! (m+k)!``.

Values that can leave the double range are carried as :class:`LogReal`
(sign, log-magnitude) and only materialised when ``|log| < 700``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from . import _backend

MAX_LOG_MATERIALIZE = 700.0
BESSEL_Z_MIN = 1e-12
BESSEL_Z_MAX = 700.0
BESSEL_ORDER_MAX = 512
MELLIN_MAX = 200

_EPS = 2.220446049250313e-16
_RESCALE = 1e250


class DomainError(ValueError):
    """Argument outside the supported domain of a special function."""


class LogReal(NamedTuple):
    """A real number stored as ``sign * exp(log_abs)``."""

    sign: int
    log_abs: float

    @property
    def value(self) -> float | None:
        """Plain float, or ``None`` when ``|log_abs| >= 700``."""
        if self.sign == 0:
            return 0.0
        if abs(self.log_abs) >= MAX_LOG_MATERIALIZE:
            return None
        return self.sign * math.exp(self.log_abs)

    @classmethod
    def from_float(cls, v: float) -> "LogReal":
        if v == 0.0:
            return cls(0, -math.inf)
        return cls(1 if v > 0 else -1, math.log(abs(v)))

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log_abs)
        except OverflowError:
            return self.sign * math.inf


@dataclass(frozen=True)
class EvalResult:
    """Function value with a claimed error bound.

    ``abs_err_est`` is ``rel_err_est * |value|``; it is ``inf`` when the value
    is not representable and only the log channel is meaningful.
    """

    value: float | None
    abs_err_est: float
    rel_err_est: float
    sign: int
    log_abs: float

    @property
    def logreal(self) -> LogReal:
        return LogReal(self.sign, self.log_abs)


@dataclass(frozen=True)
class RhoFamily:
    """``rho_0(x) .. rho_{gamma_max}(x)`` in log form plus materialised floats."""

    gamma_max: int
    x: float
    logs: tuple[LogReal, ...]
    values: tuple[float | None, ...]

    def __getitem__(self, g: int) -> float | None:
        return self.values[g]

    def __len__(self) -> int:
        return len(self.values)


def _check_z(z: float) -> None:
    if not math.isfinite(z) or not (BESSEL_Z_MIN <= z <= BESSEL_Z_MAX):
        raise DomainError(f"argument z={z!r} outside [{BESSEL_Z_MIN}, {BESSEL_Z_MAX}]")


def _k_rel_err(order: int) -> float:
    # series/CF base accuracy, then linear growth along the upward recurrence
    return 4e-15 + 4.0 * _EPS * order


def bessel_k(order: int, z: float) -> EvalResult:
    """Modified Bessel function of the second kind ``K_order(z)``.

    Order 0 and 1 come from a power series (``z <= 2``) or Steed's continued
    fraction (``z > 2``); higher orders use the upward recurrence
    ``K_{v+1} = K_{v-1} + (2v/z) K_v``, which is stable for ``K``.
    """
    if isinstance(order, bool) or int(order) != order or order < 0 or order > BESSEL_ORDER_MAX:
        raise DomainError(f"order must be an integer in [0, {BESSEL_ORDER_MAX}]")
    order = int(order)
    z = float(z)
    _check_z(z)
    k0e, k1e = _backend.k01_scaled(z)
    if order == 0:
        log_abs = math.log(k0e) - z
    elif order == 1:
        log_abs = math.log(k1e) - z
    else:
        a, b, shift = k0e, k1e, 0.0
        for v in range(1, order):
            a, b = b, a + (2.0 * v / z) * b
            if b > _RESCALE:
                shift += math.log(b)
                a /= b
                b = 1.0
        log_abs = math.log(b) + shift - z
    rel = _k_rel_err(order)
    lr = LogReal(1, log_abs)
    value = lr.value
    abs_err = rel * value if value is not None else math.inf
    return EvalResult(value, abs_err, rel, 1, log_abs)


def rho(gamma_max: int, x: float) -> RhoFamily:
    """``rho_g(x) = 2 x^{g/2} K_g(2 sqrt x)`` for ``g = 0..gamma_max``.

    Built from ``rho_0``, ``rho_1`` by ``rho_{g+1} = g rho_g + x rho_{g-1}``
    (all terms positive, so no cancellation).
    """
    if int(gamma_max) != gamma_max or gamma_max < 0:
        raise DomainError("gamma_max must be a nonnegative integer")
    gamma_max = int(gamma_max)
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"x must be positive and finite, got {x!r}")
    z = 2.0 * math.sqrt(x)
    _check_z(z)
    k0e, k1e = _backend.k01_scaled(z)
    # work with exp(z)-scaled values and a running log shift
    base = math.log(2.0) - z
    r0 = k0e
    r1 = math.sqrt(x) * k1e
    logs = [base + math.log(r0)]
    if gamma_max >= 1:
        logs.append(base + math.log(r1))
    shift = 0.0
    a, b = r0, r1
    for g in range(1, gamma_max):
        a, b = b, g * b + x * a
        if b > _RESCALE:
            shift += math.log(b)
            a /= b
            b = 1.0
        logs.append(base + shift + math.log(b))
    lr = tuple(LogReal(1, L) for L in logs)
    return RhoFamily(gamma_max, x, lr, tuple(v.value for v in lr))


def rho_value(g: int, x: float) -> float:
    """Convenience scalar ``rho_g(x)``; raises if it is not representable."""
    v = rho(g, x).values[g]
    if v is None:
        raise OverflowError(f"rho_{g}({x}) is outside the double range")
    return v


def weight_w2(x: float, y: float) -> float:
    """Two-point weight ``y^{-1} exp(-x/y - y)`` of the two-matrix model."""
    if not y > 0.0:
        raise DomainError("weight requires y > 0")
    if x < 0.0:
        raise DomainError("weight requires x >= 0")
    return math.exp(-x / y - y) / y


def rho_mellin_moment(m: int, k: int) -> int:
    """Exact ``int_0^inf x^m rho_k(x) dx = m! (m+k)!``."""
    if m < 0 or k < 0 or m > MELLIN_MAX or k > MELLIN_MAX:
        raise DomainError(f"m, k must lie in [0, {MELLIN_MAX}]")
    return math.factorial(m) * math.factorial(m + k)


def bessel_k_integral(order: int, z: float, tol: float = 1e-14) -> float:
    """Independent oracle: ``int_0^inf exp(-z cosh t) cosh(order t) dt``.

    Evaluated by adaptive Gauss-Kronrod on the exponentially scaled integrand,
    so the result is ``exp(z) K_order(z)``.  Intended for moderate orders.
    """
    from .quad import integrate_interval

    def logf(t):
        return -z * (math.cosh(t) - 1.0) + order * t + math.log1p(math.exp(-2.0 * order * t)) - math.log(2.0)

    # bracket the peak, then cut where the integrand is 1e-320 below it
    grid = [0.05 * i for i in range(1, 400)]
    peak = max(logf(t) for t in grid if t < 700.0 / max(order, 1) and math.cosh(t) * z < 1e300)
    t_max = 1.0
    while logf(t_max) > peak - 740.0:
        t_max *= 1.25

    def f(t):
        return math.exp(logf(t) - peak)

    res = integrate_interval(f, 0.0, t_max, tol=0.0, rtol=tol, max_evals=50000)
    return res.value * math.exp(peak)


def bessel_k01_mp(z, ctx=None):
    """``(K_0(z), K_1(z))`` at the working precision of an mpmath context.

    Power series evaluated with ``0.87 z`` guard digits (the series cancels
    like ``exp(2z)``) or, once ``exp(-2z)`` is below the target precision, the
    Hankel asymptotic expansion truncated at its smallest term.  Much faster
    than the general-purpose ``besselk`` at moderate arguments.
    """
    import mpmath

    mp = ctx if ctx is not None else mpmath.mp
    z = mp.mpf(z)
    if not z > 0:
        raise DomainError("z must be positive")
    dps = mp.dps
    if z > (dps + 10) * 1.1513 + 1:
        eps = mp.mpf(10) ** (-(dps + 5))
        s0 = s1 = t0 = t1 = mp.mpf(1)
        k = 0
        while True:
            k += 1
            r = (2 * k - 1) ** 2
            t0n = -t0 * r / (8 * k * z)
            t1n = t1 * (4 - r) / (8 * k * z)
            if abs(t0n) > abs(t0) or (k > 2 and abs(t1n) > abs(t1)):
                break
            t0, t1 = t0n, t1n
            s0 += t0
            s1 += t1
            if abs(t0) < eps and abs(t1) < eps:
                break
        f = mp.sqrt(mp.pi / (2 * z)) * mp.exp(-z)
        return f * s0, f * s1
    with mp.extradps(int(float(z) / 1.1513) + 10):
        z = +z
        q = z * z / 4
        lg = mp.log(z / 2)
        eg = mp.euler
        term0 = term1 = i0 = i1s = mp.mpf(1)
        s0 = mp.mpf(0)
        s1 = 1 - 2 * eg
        hk = mp.mpf(0)
        eps = mp.mpf(10) ** (-(mp.dps + 2))
        k = 0
        while True:
            k += 1
            term0 = term0 * q / (k * k)
            term1 = term1 * q / (k * (k + 1))
            hk += mp.mpf(1) / k
            i0 += term0
            i1s += term1
            s0 += hk * term0
            s1 += (2 * (hk - eg) + mp.mpf(1) / (k + 1)) * term1
            if k > 2 and term0 < eps and term0 * hk < eps * i0:
                break
        k0 = -(lg + eg) * i0 + s0
        k1 = 1 / z + (z / 2) * i1s * lg - z / 4 * s1
    return +k0, +k1


def rho_family_mp(gamma_max: int, x, ctx=None) -> list:
    """``[rho_0(x), .., rho_{gamma_max}(x)]`` as mpf at the context precision."""
    import mpmath

    mp = ctx if ctx is not None else mpmath.mp
    x = mp.mpf(x)
    if not x > 0:
        raise DomainError("x must be positive")
    with mp.extradps(5):
        r = mp.sqrt(x)
        k0, k1 = bessel_k01_mp(2 * r, mp)
        out = [2 * k0, 2 * r * k1]
        for g in range(1, gamma_max):
            out.append(g * out[g] + x * out[g - 1])
    return [+v for v in out[: gamma_max + 1]]
