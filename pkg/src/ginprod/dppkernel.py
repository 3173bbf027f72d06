"""Finite-N correlation kernel of squared singular values of ``X_2 X_1``.

The kernel is ``K_N(x, y) = sum_{j<N} Q_j(x) p_j(y) / h_j`` with
``h_j = (j!)^3``, ``p_j`` the polynomials of :mod:`ginprod.mop` and

    Q_j(x) = int_0^inf s^{-1} exp(-x/s - s) q_j(s) ds = sum_i kappa_{j,i} rho_i(x),

where ``q_j(s) = (-1)^j j! L_j(s) = sum_i kappa_{j,i} s^i`` is the monic
Laguerre polynomial.  The expansion in ``rho_i`` is exact, but its terms
cancel heavily (roughly ``0.6 j`` decimal digits), so every evaluation runs
in mpmath with a working precision chosen from the measured cancellation.
mpmath numbers also have an unbounded exponent range, so ``h_j``,
``Q_j``, ``p_j`` never overflow.
"""

from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations

import mpmath
import numpy as np
from mpmath.ctx_mp import MPContext

from . import mop
from .limitlaw import mu_density
from .quad import integrate_de, integrate_semi_infinite
from .specfun import DomainError, LogReal, rho_family_mp, rho_mellin_moment

N_MAX = 512
TARGET_DIGITS = 20
_local = threading.local()


def _ctx(dps: int) -> MPContext:
    """Per-thread mpmath context (mpmath's global context is not reentrant)."""
    c = getattr(_local, "ctx", None)
    if c is None:
        c = _local.ctx = MPContext()
    c.dps = dps
    return c


def laguerre_monic_coeffs(j: int) -> tuple[int, ...]:
    """Ascending integer coefficients of ``(-1)^j j! L_j``."""
    fj = math.factorial(j)
    return tuple((-1) ** (j - i) * (fj // math.factorial(i)) * math.comb(j, i) for i in range(j + 1))


@dataclass(frozen=True)
class KernelContext:
    """Exact tables for ``K_N``; immutable and shareable between threads."""

    N: int
    laguerre_coeffs: tuple[tuple[int, ...], ...]
    p_coeffs: tuple[tuple[Fraction, ...], ...]
    recurrence: tuple[tuple[int, int, int], ...]
    log_h: tuple[float, ...]
    base_dps: int

    @property
    def h(self) -> tuple[int, ...]:
        return tuple(math.factorial(j) ** 3 for j in range(self.N))


@lru_cache(maxsize=32)
def kernel_context(N: int) -> KernelContext:
    if isinstance(N, bool) or int(N) != N or not 1 <= N <= N_MAX:
        raise DomainError(f"N must be an integer in [1, {N_MAX}]")
    N = int(N)
    lag = tuple(laguerre_monic_coeffs(j) for j in range(N))
    pco = tuple(mop.p2_coeffs(j).coeffs for j in range(N))
    rec = []
    for j in range(N):
        t = mop.recurrence_coeffs(j)
        rec.append((int(t.b), int(t.c), int(t.d)))
    log_h = tuple(3.0 * math.lgamma(j + 1) for j in range(N))
    return KernelContext(N, lag, pco, tuple(rec), log_h, 25 + int(0.7 * N))


def _p_values(ctx: MPContext, kc: KernelContext, y, n: int) -> list:
    """``p_0(y) .. p_{n-1}(y)`` by the four-term recurrence."""
    out = [ctx.mpf(1)]
    pm1 = pm2 = ctx.mpf(0)
    p = out[0]
    for j in range(n - 1):
        b, c, d = kc.recurrence[j]
        p, pm1, pm2 = (y - b) * p - c * pm1 - d * pm2, p, pm1
        out.append(p)
    return out


def _q_values(ctx: MPContext, kc: KernelContext, x, n: int):
    """``Q_0(x) .. Q_{n-1}(x)`` plus the sums of absolute terms (for the
    cancellation estimate)."""
    rho = rho_family_mp(n - 1, x, ctx)
    qs, mags = [], []
    for j in range(n):
        terms = [k * r for k, r in zip(kc.laguerre_coeffs[j], rho)]
        qs.append(ctx.fsum(terms))
        mags.append(ctx.fsum(terms, absolute=True))
    return qs, mags


def _with_precision(fn, kc: KernelContext, extra: int = 0):
    """Run ``fn(ctx)`` -> ``(value, scale, abs_err)`` and raise precision until
    the estimated relative error relative to ``scale`` is below 10^-TARGET."""
    dps = kc.base_dps + extra
    for _ in range(6):
        ctx = _ctx(dps)
        value, scale, err = fn(ctx)
        if scale == 0 or err <= scale * ctx.mpf(10) ** (-TARGET_DIGITS):
            return value, ctx
        lost = int(ctx.log10(err / scale)) + TARGET_DIGITS + 10
        dps += max(lost, 10)
    raise ArithmeticError("precision escalation did not converge")


def q_transform(j: int, x: float) -> LogReal:
    """``Q_j(x)`` as ``(sign, log|Q_j|)``; ``.value`` gives the float."""
    if isinstance(j, bool) or int(j) != j or not 0 <= j < N_MAX:
        raise DomainError(f"j must be an integer in [0, {N_MAX - 1}]")
    x = float(x)
    if not (x > 0 and math.isfinite(x)):
        raise DomainError("x must be positive and finite")
    kc = kernel_context(int(j) + 1)

    def run(ctx):
        qs, mags = _q_values(ctx, kc, x, kc.N)
        q = qs[-1]
        return q, abs(q), mags[-1] * ctx.mpf(10) ** (-ctx.dps)

    q, ctx = _with_precision(run, kc)
    if q == 0:
        return LogReal(0, -math.inf)
    return LogReal(1 if q > 0 else -1, float(ctx.log(abs(q))))


def _kernel_mp(kc: KernelContext, x, y, ctx):
    qs, mags = _q_values(ctx, kc, x, kc.N)
    ps = _p_values(ctx, kc, ctx.mpf(y), kc.N)
    h = [ctx.mpf(math.factorial(j)) ** 3 for j in range(kc.N)]
    terms = [q * p / hj for q, p, hj in zip(qs, ps, h)]
    value = ctx.fsum(terms)
    scale = ctx.fsum(terms, absolute=True)
    # absolute error of Q_j is about 10^-dps times the sum of |terms| in its expansion
    err = ctx.fsum(m * abs(p) / hj for m, p, hj in zip(mags, ps, h)) * ctx.mpf(10) ** (-ctx.dps)
    return value, scale, err


def kernel_eval(ctx: KernelContext | int, x: float, y: float) -> float:
    """``K_N(x, y)``; ``ctx`` is a :class:`KernelContext` or ``N``."""
    kc = ctx if isinstance(ctx, KernelContext) else kernel_context(ctx)
    x, y = float(x), float(y)
    if not (x > 0 and y > 0 and math.isfinite(x) and math.isfinite(y)):
        raise DomainError("kernel arguments must be positive and finite")
    value, _ = _with_precision(lambda c: _kernel_mp(kc, x, y, c), kc)
    return float(value)


def scaled_diag(N: int, x) -> float | np.ndarray:
    """``N K_N(N^2 x, N^2 x)``; vectorised over ``x``."""
    kc = kernel_context(N)
    xa = np.asarray(x, dtype=float)
    out = np.array([N * kernel_eval(kc, N * N * xi, N * N * xi) for xi in xa.ravel()])
    return float(out[0]) if xa.ndim == 0 else out.reshape(xa.shape)


def kernel_trace(N: int, *, dps: int | None = None) -> list[float]:
    """``int_0^inf K_n(x, x) dx`` for every ``n = 1..N`` (one pass).

    Double-exponential quadrature in mpmath of the partial sums of the
    diagonal; each entry should equal ``n``.
    """
    kc = kernel_context(N)
    ctx = _ctx(dps or kc.base_dps + 10)
    h = [ctx.mpf(math.factorial(j)) ** 3 for j in range(N)]

    def f(x):
        qs, _ = _q_values(ctx, kc, x, N)
        ps = _p_values(ctx, kc, x, N)
        acc, out = ctx.mpf(0), []
        for q, p, hj in zip(qs, ps, h):
            acc += q * p / hj
            out.append(acc)
        return out

    res = integrate_de(f, ctx=ctx, atol=ctx.mpf(10) ** (-15))
    if not res.converged:
        raise ArithmeticError("trace quadrature did not converge")
    return [float(v) for v in res.value]


def scaled_diag_integral(N: int, tol: float = 1e-6) -> float:
    """``int_0^inf N K_N(N^2 x, N^2 x) dx`` by double-precision Gauss-Kronrod."""
    def f(x):
        return scaled_diag(N, x) if x < 40.0 else 0.0

    # logarithmic singularity at 0: the u^2 substitution tames it
    r = integrate_semi_infinite(f, tol=tol, origin_exponent=-0.5, scale=27.0 / 4.0)
    return r.value


# -- biorthogonality -------------------------------------------------------------

def mellin_pairing_exact(j: int, k: int) -> int:
    """Exact ``int Q_k p_j dx`` from the Mellin moments ``m! (m+i)!``."""
    q = laguerre_monic_coeffs(k)
    p = mop.p2_coeffs(j).coeffs
    total = Fraction(0)
    for m, pm in enumerate(p):
        for i, qi in enumerate(q):
            total += pm * qi * rho_mellin_moment(m, i)
    assert total.denominator == 1
    return int(total)


@dataclass(frozen=True)
class BiorthResult:
    size: int
    integrals: tuple[tuple[object, ...], ...]
    residuals: np.ndarray
    exact_agreement: np.ndarray
    evaluations: int

    @property
    def max_offdiag(self) -> float:
        r = self.residuals.copy()
        np.fill_diagonal(r, 0.0)
        return float(r.max())

    @property
    def max_diag_relerr(self) -> float:
        return float(np.max(np.diag(self.residuals)))


@lru_cache(maxsize=4)
def biorth_matrix(size: int = 21, dps: int = 60) -> BiorthResult:
    """All ``int_0^inf Q_k(x) p_j(x) dx`` for ``j, k < size`` by exp-sinh
    quadrature at ``dps`` digits, one vector-valued pass.

    ``residuals[j, k] = |I_jk - delta_jk h_j| / sqrt(h_j h_k)`` (the diagonal is
    thus the relative error against ``(j!)^3``).  ``exact_agreement`` compares
    with the Mellin-moment oracle on the same scale.
    """
    if not 1 <= size <= 31:
        raise DomainError("size must be in [1, 31]")
    kc = kernel_context(size)
    ctx = MPContext()
    ctx.dps = dps
    sq = [ctx.sqrt(ctx.mpf(math.factorial(j)) ** 3) for j in range(size)]

    def f(x):
        qs, _ = _q_values(ctx, kc, x, size)
        ps = _p_values(ctx, kc, x, size)
        qn = [q / s for q, s in zip(qs, sq)]
        pn = [p / s for p, s in zip(ps, sq)]
        return [pj * qk for pj in pn for qk in qn]

    res = integrate_de(f, ctx=ctx, atol=ctx.mpf(10) ** (-20))
    if not res.converged:
        raise ArithmeticError("biorthogonality quadrature did not converge")
    vals = res.value
    resid = np.empty((size, size))
    agree = np.empty((size, size))
    rows = []
    for j in range(size):
        row = []
        for k in range(size):
            v = vals[j * size + k]
            target = 1 if j == k else 0
            resid[j, k] = float(abs(v - target))
            exact = mellin_pairing_exact(j, k)
            agree[j, k] = float(abs(v - exact / (sq[j] * sq[k])))
            row.append(v * sq[j] * sq[k])
        rows.append(tuple(row))
    return BiorthResult(size, tuple(rows), resid, agree, res.evaluations)


def biorth_check(j: int, k: int) -> float:
    """Normalised residual ``|int Q_k p_j - delta_jk h_j| / sqrt(h_j h_k)``."""
    for v in (j, k):
        if isinstance(v, bool) or int(v) != v or not 0 <= v <= 30:
            raise DomainError("indices must be integers in [0, 30]")
    size = 21 if max(j, k) <= 20 else 31
    return float(biorth_matrix(size).residuals[j, k])


# -- joint densities -------------------------------------------------------------

def normalization_exact(N: int) -> Fraction:
    """``C_N = 1 / (N! prod_{j<N} (j!)^3)``."""
    return Fraction(1, math.factorial(N) * math.prod(math.factorial(j) ** 3 for j in range(N)))


def _det_fraction(M: list[list[Fraction]]) -> Fraction:
    """Exact determinant by fraction-free Gaussian elimination."""
    A = [list(map(Fraction, r)) for r in M]
    n = len(A)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            if f:
                for cc in range(c, n):
                    A[r][cc] -= f * A[c][cc]
    return det


def mellin_matrix(N: int, shift: int = 0) -> list[list[int]]:
    """``[int x^{i+shift} rho_j dx]_{i,j<N} = [(i+shift)! (i+shift+j)!]``."""
    return [[rho_mellin_moment(i + shift, j) for j in range(N)] for i in range(N)]


def normalization_from_mellin(N: int) -> Fraction:
    """``1 / (N! det[i! (i+j)!])`` (Andreief); equals :func:`normalization_exact`."""
    return 1 / (math.factorial(N) * _det_fraction(mellin_matrix(N)))


def _check_points(points, n_max=6):
    pts = [float(p) for p in points]
    if not 1 <= len(pts) <= n_max:
        raise DomainError(f"need between 1 and {n_max} points")
    if any(not (p > 0 and math.isfinite(p)) for p in pts):
        raise DomainError("points must be positive and finite")
    return pts


def _to_logreal(v, ctx) -> LogReal:
    if v == 0:
        return LogReal(0, -math.inf)
    return LogReal(1 if v > 0 else -1, float(ctx.log(abs(v))))


def jpdf_one_matrix(points) -> LogReal:
    """``C_N Delta(x) det[rho_{j}(x_i)]_{i, j<N}`` as a :class:`LogReal`."""
    pts = _check_points(points)
    N = len(pts)
    if len(set(pts)) < N:
        return LogReal(0, -math.inf)
    ctx = _ctx(40)
    rows = [rho_family_mp(N - 1, x, ctx) for x in pts]
    vdm = ctx.mpf(1)
    for i in range(N):
        for j in range(i + 1, N):
            vdm *= ctx.mpf(pts[j]) - ctx.mpf(pts[i])
    C = normalization_exact(N)
    val = vdm * ctx.det(ctx.matrix(rows)) * C.numerator / C.denominator
    return _to_logreal(val, ctx)


def jpdf_kernel_det(points) -> LogReal:
    """``det[K_N(x_i, x_j)] / N!`` as a :class:`LogReal`."""
    pts = _check_points(points)
    N = len(pts)
    kc = kernel_context(N)
    ctx = _ctx(kc.base_dps + 20)
    q = [_q_values(ctx, kc, x, N)[0] for x in pts]
    p = [_p_values(ctx, kc, ctx.mpf(y), N) for y in pts]
    h = [ctx.mpf(math.factorial(j)) ** 3 for j in range(N)]
    K = ctx.matrix(N, N)
    for a in range(N):
        for b in range(N):
            K[a, b] = ctx.fsum(q[a][j] * p[b][j] / h[j] for j in range(N))
    return _to_logreal(ctx.det(K) / math.factorial(N), ctx)


def random_point_sets(N: int, count: int = 20, seed: int = 20240, upper: float = 12.0,
                      min_spacing: float = 1e-6) -> list[list[float]]:
    """Fixed-seed point sets in ``(0, upper)`` with pairwise spacing >= ``min_spacing``."""
    rng = np.random.default_rng([seed, N])
    out = []
    while len(out) < count:
        pts = np.sort(rng.uniform(0.0, upper, N))
        if pts[0] > min_spacing and (N == 1 or np.min(np.diff(pts)) >= min_spacing):
            out.append([float(v) for v in pts])
    return out


def is_symmetric_jpdf(points, fn=jpdf_one_matrix, rtol=1e-12) -> bool:
    ref = fn(points)
    for perm in permutations(points):
        v = fn(list(perm))
        if v.sign != ref.sign or abs(v.log_abs - ref.log_abs) > rtol:
            return False
    return True


# -- average characteristic polynomial -------------------------------------------

def avg_char_poly(N: int) -> tuple[Fraction, ...]:
    """Exact ascending coefficients of ``E[prod_i (z - x_i)]``.

    ``prod_i (z - x_i) det[x_i^j] = det[z x_i^j - x_i^{j+1}]``; Andreief turns
    the expectation into ``det[z M_jk - M_{j+1,k}] / det M`` with
    ``M_jk = j! (j+k)!``.  The degree-N polynomial is recovered exactly by
    Lagrange interpolation at ``z = 0..N``.
    """
    if isinstance(N, bool) or int(N) != N or not 1 <= N <= 10:
        raise DomainError("N must be an integer in [1, 10]")
    M0 = mellin_matrix(N)
    M1 = mellin_matrix(N, 1)
    d0 = _det_fraction(M0)
    zs = list(range(N + 1))
    vals = [_det_fraction([[z * M0[i][j] - M1[i][j] for j in range(N)] for i in range(N)]) / d0 for z in zs]
    coeffs = [Fraction(0)] * (N + 1)
    for i, zi in enumerate(zs):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for m, zm in enumerate(zs):
            if m == i:
                continue
            basis = [Fraction(0)] + basis
            for t in range(len(basis) - 1):
                basis[t] -= zm * basis[t + 1]
            denom *= zi - zm
        for t in range(N + 1):
            coeffs[t] += vals[i] * basis[t] / denom
    return tuple(coeffs)


@dataclass(frozen=True)
class CharPolyReport:
    N: int
    coeffs: tuple[Fraction, ...]
    expected: tuple[Fraction, ...]
    elementary: dict

    @property
    def passed(self) -> bool:
        return self.coeffs == self.expected


def avg_char_poly_check(N: int) -> CharPolyReport:
    """Compare ``E[prod (z - x_i)]`` with ``p_N``; ``elementary`` lists
    ``E[e_1]``, ``E[e_2]``, ... read off the coefficients."""
    c = avg_char_poly(N)
    expected = mop.p2_coeffs(N).coeffs
    elem = {f"e{r}": (-1) ** r * c[N - r] for r in range(1, N + 1)}
    return CharPolyReport(N, c, expected, elem)


# -- export ----------------------------------------------------------------------

def write_diag_csv(path, N: int, xs) -> None:
    xs = np.asarray(xs, dtype=float)
    kd = scaled_diag(N, xs)
    md = mu_density(xs, 1.0)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "scaled_diag", "mu_density"])
        for row in zip(np.atleast_1d(xs), np.atleast_1d(kd), np.atleast_1d(md)):
            w.writerow([repr(float(v)) for v in row])


def mp_version() -> str:
    return mpmath.__version__
