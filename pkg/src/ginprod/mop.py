"""Multiple orthogonal polynomials associated with Macdonald functions.

``P_k^{(gamma,kappa)}`` is monic of degree ``k`` and orthogonal against
``x^kappa rho_gamma`` and ``x^kappa rho_{gamma+1}`` on ``(0, inf)``.  The
coefficient of ``x^{k-j}`` is

    a_k(j) = (-1)^j C(k, j) (kappa+1)_k (kappa+gamma+1)_k
             / ((kappa+1)_{k-j} (kappa+gamma+1)_{k-j}),

and the family obeys the four-term recurrence
``x P_k = P_{k+1} + b_k P_k + c_k P_{k-1} + d_k P_{k-2}``.  At
``kappa = gamma = 0`` these are the biorthogonal polynomials ``p_k`` of the
two-matrix product ensemble.

Coefficients are exact rationals.  Floating-point evaluation always goes
through the recurrence with running renormalisation, never through the
monomial basis (whose coefficients grow like ``(k!)^3``).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import _backend
from .measures import CountingMeasure
from .specfun import LogReal

K_MAX_EXACT = 2000
K_MAX_EVAL = 5000


class ParameterError(ValueError):
    """Parameters outside ``kappa > -1``, ``gamma >= 0`` or degree limits."""


class ZeroFindingError(ArithmeticError):
    """Zeros could not be separated; carries residual diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


def as_rational(v) -> Fraction:
    """Exact rational from int, Fraction or string such as ``"1/2"``.

    Floats are refused so that no binary rounding leaks into exact coefficients.
    """
    if isinstance(v, float):
        raise TypeError("pass rational parameters as int, Fraction or str, not float")
    return Fraction(v)


def _params(kappa, gamma):
    kappa = as_rational(kappa)
    gamma = as_rational(gamma)
    if not kappa > -1:
        raise ParameterError(f"kappa must exceed -1, got {kappa}")
    if gamma < 0:
        raise ParameterError(f"gamma must be nonnegative, got {gamma}")
    return kappa, gamma


def _check_degree(k, limit):
    if isinstance(k, bool) or int(k) != k or k < 0:
        raise ParameterError("degree must be a nonnegative integer")
    if k > limit:
        raise ParameterError(f"degree {k} exceeds the supported limit {limit}")
    return int(k)


@dataclass(frozen=True)
class ExactPolynomial:
    """Monic polynomial with rational coefficients ``c_0 .. c_k`` (ascending)."""

    kappa: Fraction
    gamma: Fraction
    coeffs: tuple[Fraction, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_monic(self) -> bool:
        return self.coeffs[-1] == 1

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other):
        if not isinstance(other, ExactPolynomial):
            return NotImplemented
        return (self.kappa, self.gamma, self.coeffs) == (other.kappa, other.gamma, other.coeffs)

    def __hash__(self):
        return hash((self.kappa, self.gamma, self.coeffs))

    def to_json_dict(self) -> dict:
        return {
            "kappa": str(self.kappa),
            "gamma": str(self.gamma),
            "degree": self.degree,
            "coeffs": [str(c) for c in self.coeffs],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ExactPolynomial":
        return cls(Fraction(d["kappa"]), Fraction(d["gamma"]), tuple(Fraction(c) for c in d["coeffs"]))


class RecurrenceTriple(NamedTuple):
    b: Fraction
    c: Fraction
    d: Fraction


def coeffs_exact(k: int, kappa=0, gamma=0) -> ExactPolynomial:
    """``P_k^{(gamma,kappa)}`` from the Pochhammer-ratio coefficients."""
    k = _check_degree(k, K_MAX_EXACT)
    kappa, gamma = _params(kappa, gamma)
    desc = [Fraction(1)]  # desc[j] = a_k(j), coefficient of x^{k-j}
    for j in range(1, k + 1):
        m = k - j + 1
        desc.append(-desc[-1] * Fraction(m, j) * (kappa + m) * (kappa + gamma + m))
    return ExactPolynomial(kappa, gamma, tuple(reversed(desc)))


def p2_coeffs(k: int) -> ExactPolynomial:
    """Biorthogonal ``p_k`` of the two-matrix ensemble, directly from
    ``sum_j (-1)^{k-j} / (k-j)! (k!/j!)^3 x^j``."""
    k = _check_degree(k, K_MAX_EXACT)
    fk = math.factorial(k)
    coeffs = []
    for j in range(k + 1):
        r = fk // math.factorial(j)
        coeffs.append(Fraction((-1) ** (k - j) * r**3, math.factorial(k - j)))
    return ExactPolynomial(Fraction(0), Fraction(0), tuple(coeffs))


def recurrence_coeffs(k: int, kappa=0, gamma=0) -> RecurrenceTriple:
    """Exact ``(b_k, c_k, d_k)`` of the four-term recurrence."""
    k = _check_degree(k, K_MAX_EVAL)
    kappa, gamma = _params(kappa, gamma)
    b = (k + kappa + 1) * (3 * k + kappa + 2 * gamma) - (kappa + 1) * (gamma - 1)
    c = k * (k + kappa) * (k + kappa + gamma) * (3 * k + 2 * kappa + gamma)
    d = k * (k - 1) * (k + kappa - 1) * (k + kappa) * (k + kappa + gamma - 1) * (k + kappa + gamma)
    return RecurrenceTriple(Fraction(b), Fraction(c), Fraction(d))


def scaled_recurrence_coeffs(k: int, n: int, kappa=0, gamma=0) -> RecurrenceTriple:
    """Recurrence coefficients of ``P_{k,n}(x) = P_k(n^2 x) / n^{2k}``:
    ``(b_k / n^2, c_k / n^4, d_k / n^6)``."""
    b, c, d = recurrence_coeffs(k, kappa, gamma)
    n2 = Fraction(n) ** 2
    return RecurrenceTriple(b / n2, c / n2**2, d / n2**3)


# -- exact polynomial arithmetic on ascending coefficient tuples ------------

def _poly_sub_scaled(acc, p, s):
    out = list(acc) + [Fraction(0)] * max(0, len(p) - len(acc))
    for i, c in enumerate(p):
        out[i] -= s * c
    return out


def recurrence_residual(k: int, kappa=0, gamma=0) -> list[Fraction]:
    """Coefficients of ``x P_k - P_{k+1} - b_k P_k - c_k P_{k-1} - d_k P_{k-2}``."""
    b, c, d = recurrence_coeffs(k, kappa, gamma)
    pk = coeffs_exact(k, kappa, gamma).coeffs
    res = [Fraction(0)] + list(pk)
    res = _poly_sub_scaled(res, coeffs_exact(k + 1, kappa, gamma).coeffs, 1)
    res = _poly_sub_scaled(res, pk, b)
    if k >= 1:
        res = _poly_sub_scaled(res, coeffs_exact(k - 1, kappa, gamma).coeffs, c)
    if k >= 2:
        res = _poly_sub_scaled(res, coeffs_exact(k - 2, kappa, gamma).coeffs, d)
    return res


# -- floating-point evaluation -------------------------------------------------

@lru_cache(maxsize=64)
def _scaled_arrays(k: int, n: int, kappa: Fraction, gamma: Fraction):
    b = np.empty(k)
    c = np.empty(k)
    d = np.empty(k)
    for j in range(k):
        t = scaled_recurrence_coeffs(j, n, kappa, gamma)
        b[j], c[j], d[j] = float(t.b), float(t.c), float(t.d)
    for a in (b, c, d):
        a.setflags(write=False)
    return b, c, d


def _prepare(k, n, kappa, gamma, limit=K_MAX_EVAL):
    k = _check_degree(k, limit)
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ParameterError("scaling parameter n must be a positive integer")
    kappa, gamma = _params(kappa, gamma)
    return k, int(n), _scaled_arrays(k, int(n), kappa, gamma)


def eval_scaled_many(k: int, n: int, xs, kappa=0, gamma=0):
    """Vectorised ``P_{k,n}`` at ``xs``: returns ``(sign, log|P|)`` arrays."""
    k, n, (b, c, d) = _prepare(k, n, kappa, gamma)
    xs = np.asarray(xs, dtype=float)
    if np.isnan(xs).any():
        raise ValueError("NaN evaluation point")
    sign, logabs, _ = _backend.recurrence_eval(np.atleast_1d(xs).ravel(), b, c, d)
    return sign.reshape(xs.shape), logabs.reshape(xs.shape)


def eval_scaled(k: int, n: int, x: float, kappa=0, gamma=0) -> LogReal:
    """``P_{k,n}(x) = P_k(n^2 x) / n^{2k}`` as ``(sign, log|.|)``; ``.value``
    materialises the float when it is representable."""
    x = float(x)
    if math.isnan(x):
        raise ValueError("NaN evaluation point")
    sign, logabs = eval_scaled_many(k, n, np.array([x]), kappa, gamma)
    return LogReal(int(sign[0]), float(logabs[0]))


# -- zeros ---------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroSet:
    k: int
    n: int
    zeros: np.ndarray
    refinement_residual: float
    kappa: Fraction = Fraction(0)
    gamma: Fraction = Fraction(0)
    method: str = "eigen+newton"
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.zeros)


def gershgorin_bound(k: int, n: int, kappa=0, gamma=0, *, j_max: int | None = None) -> float:
    """``sup|b| + sup|c| + sup|d| + 1`` over scaled coefficients with index <= j_max."""
    j_max = k if j_max is None else j_max
    vals = [scaled_recurrence_coeffs(j, n, kappa, gamma) for j in range(j_max + 1)]
    return float(max(abs(t.b) for t in vals) + max(abs(t.c) for t in vals)
                 + max(abs(t.d) for t in vals) + 1)


def hessenberg_matrix(k: int, n: int, kappa=0, gamma=0, *, balanced: bool = False) -> np.ndarray:
    """k x k lower-Hessenberg matrix whose eigenvalues are the zeros of ``P_{k,n}``.

    Row ``j`` holds ``(d_j, c_j, b_j, 1)`` at columns ``j-2 .. j+1``.  With
    ``balanced`` the diagonal similarity ``delta_{j+1} = delta_j sqrt(c_{j+1})``
    is applied, which gives a symmetric tridiagonal part.
    """
    k, n, (b, c, d) = _prepare(k, n, kappa, gamma, K_MAX_EXACT)
    T = np.diag(b)
    if k > 1:
        if balanced:
            sc = np.sqrt(c[1:])
            T += np.diag(sc, 1) + np.diag(sc, -1)
            if k > 2:
                T += np.diag(d[2:] / np.sqrt(c[2:] * c[1:-1]), -2)
        else:
            T += np.diag(np.ones(k - 1), 1) + np.diag(c[1:], -1)
            if k > 2:
                T += np.diag(d[2:], -2)
    return T


def _sign_pattern_ok(z, bound, arrays):
    b, c, d = arrays
    k = len(b)
    if len(z) != k or not np.all(np.isfinite(z)):
        return False
    if k == 0:
        return True
    if z[0] <= 0 or np.any(np.diff(z) <= 0) or z[-1] >= bound:
        return False
    probes = np.concatenate([[0.0], 0.5 * (z[1:] + z[:-1]), [bound]])
    sign, _, _ = _backend.recurrence_eval(probes, b, c, d)
    if np.any(sign == 0):
        return False
    return int(np.count_nonzero(sign[1:] != sign[:-1])) == k


def _newton(z, arrays, iters=60):
    b, c, d = arrays
    for _ in range(iters):
        _, _, step = _backend.recurrence_eval(z, b, c, d)
        if not np.all(np.isfinite(step)):
            return z
        z = z - step
        if np.max(np.abs(step) / np.abs(z)) < 1e-15:
            break
    return z


def _residuals(z, arrays):
    """Absolute and relative Newton corrections ``|P/P'|`` at the zeros."""
    if len(z) == 0:
        return 0.0, 0.0
    _, _, step = _backend.recurrence_eval(z, *arrays)
    a = np.abs(step)
    return float(np.max(a)), float(np.max(a / np.abs(z)))


def _scan_brackets(bound, arrays):
    b, c, d = arrays
    k = len(b)
    u_max = bound ** (1.0 / 3.0)
    m = 4 * k + 16
    while m <= 256 * k + 16:
        # zeros are near-uniform in the cube-root variable, including at the hard edge
        u = np.linspace(0.0, u_max, m + 1)
        x = u**3
        sign, _, _ = _backend.recurrence_eval(x, b, c, d)
        hit = sign == 0
        if hit.any():
            x[hit] *= 1.0 + 1e-12
            sign, _, _ = _backend.recurrence_eval(x, b, c, d)
        idx = np.nonzero(sign[1:] != sign[:-1])[0]
        if len(idx) == k:
            return x[idx], x[idx + 1], sign[idx]
        if len(idx) > k:
            raise ZeroFindingError("more sign changes than the degree", {"changes": len(idx), "k": k})
        m *= 2
    raise ZeroFindingError("could not separate clustered zeros by scanning", {"grid": m, "k": k})


def _bracketed_refine(lo, hi, s_lo, arrays, iters=200):
    """Safeguarded Newton inside sign-change brackets (bisection when Newton leaves)."""
    b, c, d = arrays
    lo = lo.copy()
    hi = hi.copy()
    x = 0.5 * (lo + hi)
    for _ in range(iters):
        sign, _, step = _backend.recurrence_eval(x, b, c, d)
        exact = sign == 0
        same = sign == s_lo
        lo = np.where(same | exact, x, lo)
        hi = np.where(~same | exact, x, hi)
        with np.errstate(invalid="ignore"):
            xn = x - step
            ok = np.isfinite(xn) & (xn > lo) & (xn < hi)
        xn = np.where(ok, xn, 0.5 * (lo + hi))
        xn = np.where(exact, x, xn)
        done = (np.abs(xn - x) <= 4e-16 * np.abs(x)) | (hi - lo <= 4e-16 * np.abs(x))
        x = xn
        if done.all():
            break
    return x


def zeros(k: int, n: int = 1, kappa=0, gamma=0) -> ZeroSet:
    """All zeros of ``P_{k,n}`` (simple, positive, ascending).

    Eigenvalues of the balanced Hessenberg recurrence matrix seed Newton's
    method on the recurrence.  The result is accepted only if ``P`` changes
    sign exactly ``k`` times across the zeros; otherwise (the matrix is highly
    non-normal and its double-precision spectrum degrades beyond k ~ 100) the
    zeros are bracketed by a sign scan in ``x^{1/3}`` and refined by
    safeguarded Newton.

    ``refinement_residual`` is ``max |P_{k,n}(z) / P'_{k,n}(z)|``, the size of
    the next Newton correction in the scaled variable.
    """
    k, n, arrays = _prepare(k, n, kappa, gamma, K_MAX_EXACT)
    kappa, gamma = _params(kappa, gamma)
    if k == 0:
        return ZeroSet(0, n, np.empty(0), 0.0, kappa, gamma, "trivial")
    b, c, d = arrays
    bound = float(np.max(b + c + d + 1.0)) * (1.0 + 1e-12)
    method = "eigen+newton"
    z = None
    ev = np.linalg.eigvals(hessenberg_matrix(k, n, kappa, gamma, balanced=True))
    if np.max(np.abs(ev.imag)) <= 1e-10 * np.max(np.abs(ev.real)) and np.min(ev.real) > 0:
        z = np.sort(_newton(np.sort(ev.real), arrays))
        if not _sign_pattern_ok(z, bound, arrays):
            z = None
    if z is None:
        method = "scan+bracket"
        lo, hi, s_lo = _scan_brackets(bound, arrays)
        z = np.sort(_bracketed_refine(lo, hi, s_lo, arrays))
        if not _sign_pattern_ok(z, bound, arrays):
            resid, rel = _residuals(z, arrays)
            raise ZeroFindingError("refined zeros fail the sign-change test",
                                   {"residual": resid, "relative_residual": rel, "k": k, "n": n})
    resid, rel = _residuals(z, arrays)
    z.setflags(write=False)
    return ZeroSet(k, n, z, resid, kappa, gamma, method,
                   {"gershgorin_row_bound": bound, "relative_residual": rel})


def zero_counting_measure(z: ZeroSet) -> CountingMeasure:
    """Uniform measure with weight ``1/k`` on the (already scaled) zeros."""
    if len(z.zeros) == 0:
        raise ValueError("empty zero set")
    return CountingMeasure(z.zeros)


# -- structural checks ---------------------------------------------------------

@dataclass(frozen=True)
class CheckEntry:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


@dataclass
class StructuralReport:
    entries: list[CheckEntry]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)


def structural_checks(k_max: int, kappa=0, gamma=0) -> StructuralReport:
    """Interlacing of consecutive zero sets and the Gershgorin-type bound.

    Interlacing uses a common scaling ``n = k_max``; the bound check uses
    ``n = k`` for each degree, as in the diagonal limit ``k/n -> 1``.
    """
    k_max = _check_degree(k_max, 500)
    kappa, gamma = _params(kappa, gamma)
    entries = []
    n_common = max(k_max, 1)
    prev = None
    worst_gap = math.inf
    inter_ok = True
    for k in range(1, k_max + 1):
        cur = zeros(k, n_common, kappa, gamma).zeros
        if prev is not None:
            # prev has k-1 zeros: cur[i] < prev[i] < cur[i+1]
            gaps = np.concatenate([prev - cur[:-1], cur[1:] - prev])
            worst_gap = min(worst_gap, float(gaps.min()))
            inter_ok &= bool(np.all(gaps > 0))
        prev = cur
    entries.append(CheckEntry("interlacing", inter_ok, worst_gap if k_max > 1 else 0.0, 0.0,
                              "min separation between consecutive zero sets"))
    bound_ok = True
    worst_margin = math.inf
    for k in range(1, k_max + 1):
        zk = zeros(k, k, kappa, gamma).zeros
        bound = gershgorin_bound(k, k, kappa, gamma)
        margin = bound - float(zk.max())
        worst_margin = min(worst_margin, margin)
        bound_ok &= bool(margin >= 0 and zk.min() > 0)
    entries.append(CheckEntry("gershgorin_bound", bound_ok, worst_margin if k_max else 0.0, 0.0,
                              "min of (bound - largest zero) over degrees"))
    return StructuralReport(entries)


# -- export --------------------------------------------------------------------

def write_zeros_csv(z: ZeroSet, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "zero"])
        for i, v in enumerate(z.zeros):
            w.writerow([i, repr(float(v))])


def write_polynomial_json(p: ExactPolynomial, path) -> None:
    with open(path, "w") as fh:
        json.dump(p.to_json_dict(), fh, indent=1)


def read_polynomial_json(path) -> ExactPolynomial:
    with open(path) as fh:
        return ExactPolynomial.from_json_dict(json.load(fh))
