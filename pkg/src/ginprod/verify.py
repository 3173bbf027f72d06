"""Verification suites behind ``ginprod verify``.

Each suite returns a list of :class:`Check`; a report is
``{suite, checks: [{name, pass, measured, tolerance}]}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import dppkernel, ensemble, limitlaw, mop, specfun
from .config import DEFAULT_TOLERANCES, SUITES
from .quad import integrate_interval, integrate_semi_infinite


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: float
    tolerance: float

    def to_dict(self) -> dict:
        m = self.measured
        return {
            "name": self.name,
            "pass": bool(self.passed),
            "measured": m if math.isfinite(m) else str(m),
            "tolerance": self.tolerance,
        }


def _le(name, measured, tol):
    measured = float(measured)
    return Check(name, bool(measured <= tol), measured, float(tol))


def mellin_quadrature(m: int, k: int, tol: float = 1e-10):
    """``int_0^inf x^m rho_k(x) dx`` by Gauss-Kronrod; returns the QuadResult."""
    def f(x):
        if x >= 1e5:  # rho_k(x) < exp(-600) there
            return 0.0
        return x**m * specfun.rho_value(k, x)

    exact = specfun.rho_mellin_moment(m, k)
    scale = max(1.0, (m + k / 2.0) ** 2)
    return integrate_semi_infinite(f, tol=tol * exact, rtol=tol, scale=scale)


# -- suites ----------------------------------------------------------------------

def suite_exact(tols: dict, **_) -> list[Check]:
    checks = []
    bad = sum(mop.p2_coeffs(k) != mop.coeffs_exact(k, 0, 0) for k in range(101))
    checks.append(Check("p2_coeffs == coeffs_exact(k,0,0), k<=100", bad == 0, bad, 0))
    bad = 0
    for kappa in (0, Fraction(1, 2), 1):
        for gamma in (0, 1, 2):
            for k in range(51):
                bad += any(c != 0 for c in mop.recurrence_residual(k, kappa, gamma))
    checks.append(Check("four-term recurrence exact, k<=50, 9 parameter pairs", bad == 0, bad, 0))
    b0 = mop.recurrence_coeffs(0).b
    checks.append(Check("b_0 = 1 (x P_0 = P_1 + b_0 P_0)", b0 == 1 and mop.coeffs_exact(1).coeffs == (-1, 1),
                        float(b0), 1))
    t2 = mop.recurrence_coeffs(2)
    checks.append(Check("(b_2, c_2, d_2) = (19, 48, 8)", tuple(t2) == (19, 48, 8), float(t2.b), 19))
    bad = 0
    for N in range(1, 51):
        t = mop.recurrence_coeffs(N)
        bad += t.c != 3 * N**4 or t.d != N**3 * (N - 1) ** 3 or t.b != 3 * N * (N + 1) + 1
    checks.append(Check("scaled limits c=3N^4, d=N^3(N-1)^3, b=3N(N+1)+1 exactly, N<=50", bad == 0, bad, 0))
    for N in (1, 2):
        rep = dppkernel.avg_char_poly_check(N)
        checks.append(Check(f"E[prod(z - x_i)] = p_{N}, N={N}", rep.passed, float(rep.elementary["e1"]),
                            float(-rep.expected[N - 1])))
    for N in (1, 2, 3):
        ok = dppkernel.normalization_from_mellin(N) == dppkernel.normalization_exact(N)
        checks.append(Check(f"normalisation via Mellin determinant, N={N}", ok,
                            float(1 / dppkernel.normalization_from_mellin(N)),
                            float(1 / dppkernel.normalization_exact(N))))
    return checks


def suite_specfun(tols: dict, **_) -> list[Check]:
    checks = []
    worst = 0.0
    for m in range(11):
        for k in range(11):
            r = mellin_quadrature(m, k)
            exact = specfun.rho_mellin_moment(m, k)
            worst = max(worst, abs(r.value - exact) / exact)
    checks.append(_le("Mellin moments by quadrature, m,k<=10 (max rel err)", worst, tols["mellin_rel"]))
    worst = 0.0
    for order, z in [(0, 2.0), (1, 0.5), (3, 1.7), (10, 5.0), (0, 50.0), (1, 300.0)]:
        v = specfun.bessel_k(order, z)
        oracle = specfun.bessel_k_integral(order, z) * math.exp(-z)
        worst = max(worst, abs(v.value - oracle) / oracle)
    checks.append(_le("bessel_k vs integral oracle (max rel err)", worst, tols["bessel_rel"]))
    worst = 0.0
    worst_direct = 0.0
    for x in (1e-3, 0.1, 1.0, 10.0, 100.0):
        # direct values 2 x^{g/2} K_g(2 sqrt x) come from the Bessel recurrence in z,
        # a different route from the rho recurrence used by specfun.rho
        z = 2.0 * math.sqrt(x)
        logs = [math.log(2.0) + 0.5 * g * math.log(x) + specfun.bessel_k(g, z).log_abs for g in range(102)]
        fam = specfun.rho(101, x)
        worst_direct = max(worst_direct, max(abs(math.expm1(a.log_abs - b)) for a, b in zip(fam.logs, logs)))
        for g in range(1, 101):
            rhs = g * math.exp(logs[g] - logs[g + 1]) + x * math.exp(logs[g - 1] - logs[g + 1])
            worst = max(worst, abs(1.0 - rhs))
    checks.append(_le("rho recurrence residual on direct values, gamma<=100", worst, tols["rho_recurrence_rel"]))
    checks.append(_le("rho family vs direct Bessel evaluation, gamma<=101", worst_direct, tols["rho_recurrence_rel"]))
    mass = integrate_interval(lambda x: limitlaw.mu_density(x), 0.0, limitlaw.SOFT_EDGE, 1e-10,
                              (-2.0 / 3.0, 0.5)).value
    checks.append(_le("mu total mass", abs(mass - 1.0), tols["mass_abs"]))
    worst = max(abs(limitlaw.mu_moment(m) / limitlaw.fuss_catalan(m) - 1.0) for m in range(1, 6))
    checks.append(_le("mu moments 1..5 vs Fuss-Catalan (max rel err)", worst, tols["moment_rel"]))
    x = 1e-9
    hard = abs(x ** (2 / 3) * limitlaw.mu_density(x) / limitlaw.HARD_EDGE_CONST - 1.0)
    checks.append(_le("hard edge x^{2/3} mu(x) -> sqrt(3)/(2 pi)", hard, tols["edge_rel"]))
    d = 1e-8
    soft = abs(limitlaw.mu_density(limitlaw.SOFT_EDGE - d) / math.sqrt(d) / limitlaw.SOFT_EDGE_CONST - 1.0)
    checks.append(_le("soft edge mu(x)/sqrt(27/4-x) -> 4/(81 pi)", soft, tols["edge_rel"]))
    return checks


def suite_biorth(tols: dict, **_) -> list[Check]:
    r = dppkernel.biorth_matrix(21)
    return [
        _le("biorthogonality off-diagonal residual, j,k<=20", r.max_offdiag, tols["biorth"]),
        _le("biorthogonality diagonal rel err vs (j!)^3, j<=20", r.max_diag_relerr, tols["biorth"]),
        _le("quadrature vs exact Mellin pairing (normalised)", float(r.exact_agreement.max()), tols["biorth"]),
    ]


def zero_ks_sequence(Ns=(50, 100, 200, 400)) -> list[float]:
    return [mop.zero_counting_measure(mop.zeros(N, N)).ks_distance(limitlaw.mu_cdf) for N in Ns]


def suite_zeros(tols: dict, **_) -> list[Check]:
    checks = []
    z2 = mop.zeros(2, 1).zeros
    err = max(abs(z2[0] - (4 - 2 * math.sqrt(3))), abs(z2[1] - (4 + 2 * math.sqrt(3))))
    checks.append(_le("zeros of p_2 = 4 -+ 2 sqrt 3", err, 1e-13))
    rep = mop.structural_checks(60)
    for e in rep.entries:
        checks.append(Check(f"structural: {e.name}, k<=60", e.passed, e.measured, e.tolerance))
    z = mop.zeros(400, 400)
    checks.append(_le("largest zero of P_{400,400}", float(z.zeros[-1]), tols["zeros_max"]))
    checks.append(_le("refinement residual P_{400,400}", z.refinement_residual, tols["zeros_residual"]))
    ks = zero_ks_sequence()
    checks.append(_le("KS(zero measure, mu) at N=400", ks[-1], tols["zeros_ks"]))
    dec = all(b < a for a, b in zip(ks, ks[1:]))
    checks.append(Check("KS decreasing over N=50,100,200,400", dec, ks[-1], ks[0]))
    return checks


def suite_montecarlo(tols: dict, seed: int = 42, workers: int = 1, **_) -> list[Check]:
    b = ensemble.run_batch(200, 100, seed, workers=workers)
    e = ensemble.empirical_cdf(b)
    checks = [_le("KS(empirical, mu), N=200, 100 trials", e.ks_distance(limitlaw.mu_cdf), tols["mc_ks"])]
    for m, target in ((1, 1.0), (2, 3.0)):
        mean, se = ensemble.pooled_moment_stats(b, m)
        checks.append(_le(f"pooled moment m={m} vs {target:g} (standard errors)",
                          abs(mean - target) / se, tols["mc_moment_se"]))
    return checks


def kernel_diag_errors(xs=(1, 2, 3, 4, 5, 6), Ns=(30, 60)) -> dict:
    out = {}
    for N in Ns:
        v = dppkernel.scaled_diag(N, np.asarray(xs, dtype=float))
        m = limitlaw.mu_density(np.asarray(xs, dtype=float))
        out[N] = np.abs(v - m) / m
    return out


def suite_kernel(tols: dict, **_) -> list[Check]:
    checks = []
    tr = dppkernel.kernel_trace(20)
    for N in (1, 5, 10, 20):
        checks.append(_le(f"kernel trace N={N}", abs(tr[N - 1] - N), tols["trace_abs"]))
    errs = kernel_diag_errors()
    for i, x in enumerate((1, 2, 3, 4, 5, 6)):
        e30, e60 = float(errs[30][i]), float(errs[60][i])
        checks.append(Check(f"diag error decreases N=30->60 at x={x}", e60 < e30, e60, e30))
        checks.append(_le(f"diag rel error at N=60, x={x}", e60, tols["kernel_rel"]))
    worst = 0.0
    for N in (1, 2, 3, 4):
        for pts in dppkernel.random_point_sets(N):
            a = dppkernel.jpdf_one_matrix(pts)
            b = dppkernel.jpdf_kernel_det(pts)
            worst = max(worst, abs(math.expm1(b.log_abs - a.log_abs)) if a.sign == b.sign else math.inf)
    checks.append(_le("jpdf one-matrix vs kernel determinant, N<=4 (max rel)", worst, tols["jpdf_rel"]))
    return checks


SUITE_FUNCS: dict[str, Callable] = {
    "exact": suite_exact,
    "specfun": suite_specfun,
    "biorth": suite_biorth,
    "zeros": suite_zeros,
    "montecarlo": suite_montecarlo,
    "kernel": suite_kernel,
}


def run_suite(suite: str, tolerances: dict | None = None, *, seed: int = 42, workers: int = 1) -> dict:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    tols = dict(DEFAULT_TOLERANCES)
    tols.update(tolerances or {})
    names = [s for s in SUITES if s != "all"] if suite == "all" else [suite]
    checks = []
    for name in names:
        for c in SUITE_FUNCS[name](tols, seed=seed, workers=workers):
            d = c.to_dict()
            if suite == "all":
                d["name"] = f"{name}: {d['name']}"
            checks.append(d)
    return {"suite": suite, "checks": checks}


def report_passed(report: dict) -> bool:
    return all(c["pass"] for c in report["checks"])
