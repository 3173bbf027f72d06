import math
from fractions import Fraction
from math import factorial

import mpmath
import numpy as np
import pytest
from scipy import special

from ginprod import dppkernel, limitlaw, mop
from ginprod.specfun import DomainError


def rho0(x):
    return 2 * special.k0(2 * math.sqrt(x))


def rho1(x):
    return 2 * math.sqrt(x) * special.k1(2 * math.sqrt(x))


def q_oracle(j, x):
    """Defining integral int_0^inf s^-1 exp(-x/s - s) q_j(s) ds, q_j = (-1)^j j! L_j."""
    with mpmath.workdps(30):
        q = lambda s: (-1) ** j * factorial(j) * mpmath.laguerre(j, 0, s)
        f = lambda s: mpmath.exp(-x / s - s) / s * q(s)
        return float(mpmath.quad(f, [0, math.sqrt(x), 1, 10, mpmath.inf]))


# -- Q transform -----------------------------------------------------------------

def test_laguerre_coeffs():
    assert dppkernel.laguerre_monic_coeffs(0) == (1,)
    assert dppkernel.laguerre_monic_coeffs(1) == (-1, 1)
    assert dppkernel.laguerre_monic_coeffs(2) == (2, -4, 1)
    for j in range(8):
        c = dppkernel.laguerre_monic_coeffs(j)
        poly = np.polynomial.laguerre.lag2poly([0] * j + [1]) * (-1) ** j * factorial(j)
        assert np.allclose(c, poly, rtol=1e-12)


def test_q0_q1_examples():
    assert dppkernel.q_transform(0, 1.0).value == pytest.approx(rho0(1.0), rel=1e-14)
    assert dppkernel.q_transform(1, 2.0).value == pytest.approx(q_oracle(1, 2.0), rel=1e-9)
    assert dppkernel.q_transform(1, 2.0).value == pytest.approx(rho1(2.0) - rho0(2.0), rel=1e-13)


@pytest.mark.parametrize("j, x", [(2, 0.3), (3, 1.0), (5, 4.0), (8, 12.0), (12, 30.0)])
def test_q_vs_defining_integral(j, x):
    assert dppkernel.q_transform(j, x).value == pytest.approx(q_oracle(j, x), rel=1e-9)


def test_q0_mass():
    from ginprod.quad import integrate_semi_infinite
    r = integrate_semi_infinite(lambda x: dppkernel.q_transform(0, x).value if x < 1e4 else 0.0, tol=1e-10)
    assert r.value == pytest.approx(1.0, abs=1e-9)


def test_q_large_index_log_scaled():
    v = dppkernel.q_transform(300, 5.0)
    assert v.sign in (-1, 1) and math.isfinite(v.log_abs)


def test_q_domain():
    with pytest.raises(DomainError):
        dppkernel.q_transform(512, 1.0)
    with pytest.raises(DomainError):
        dppkernel.q_transform(2, 0.0)


# -- kernel ----------------------------------------------------------------------

def test_kernel_context():
    kc = dppkernel.kernel_context(6)
    assert kc.h == tuple(factorial(j) ** 3 for j in range(6))
    assert all(c[-1] == 1 for c in kc.laguerre_coeffs)
    assert all(c[-1] == 1 for c in kc.p_coeffs)
    assert kc.log_h[5] == pytest.approx(3 * math.log(120))
    with pytest.raises(DomainError):
        dppkernel.kernel_context(0)


def test_k1_example():
    assert dppkernel.kernel_eval(1, 1.0, 5.0) == pytest.approx(0.2277877, rel=1e-6)
    assert dppkernel.kernel_eval(1, 1.0, 5.0) == pytest.approx(rho0(1.0), rel=1e-14)
    assert dppkernel.kernel_eval(1, 1.0, 0.1) == dppkernel.kernel_eval(1, 1.0, 5.0)


def test_k3_vs_explicit_sum():
    x, y = 2.5, 0.7
    kc = dppkernel.kernel_context(3)
    expected = sum(q_oracle(j, x) * float(mop.p2_coeffs(j)(Fraction(y))) / factorial(j) ** 3 for j in range(3))
    assert dppkernel.kernel_eval(kc, x, y) == pytest.approx(expected, rel=1e-9)


def test_scaled_diag_n1():
    assert dppkernel.scaled_diag(1, 1.0) == pytest.approx(rho0(1.0), rel=1e-14)


def test_kernel_trace():
    tr = dppkernel.kernel_trace(20)
    for n, v in enumerate(tr, start=1):
        assert abs(v - n) <= 1e-6


def test_overflow_safety():
    v = dppkernel.kernel_eval(100, 30000.0, 30000.0)
    assert math.isfinite(v)


def test_scaled_diag_nonnegative():
    xs = np.linspace(0.05, 7.0, 50)
    assert np.all(dppkernel.scaled_diag(40, xs) >= 0)


def test_scaled_diag_improves_at_two():
    m = limitlaw.mu_density(2.0)
    e30 = abs(dppkernel.scaled_diag(30, 2.0) - m)
    e60 = abs(dppkernel.scaled_diag(60, 2.0) - m)
    assert e60 < e30


@pytest.mark.parametrize("N", [10, 30])
def test_scaled_diag_integral(N):
    assert abs(dppkernel.scaled_diag_integral(N) - 1.0) <= 1e-4


def test_kernel_reproducing():
    # int K_N(x, s) K_N(s, y) ds = K_N(x, y)
    N, x, y = 4, 1.3, 2.2
    kc = dppkernel.kernel_context(N)
    with mpmath.workdps(20):
        f = lambda s: dppkernel.kernel_eval(kc, x, float(s)) * dppkernel.kernel_eval(kc, float(s), y) if s > 0 else 0.0
        v = float(mpmath.quad(f, [0, 1, 5, 20, 80, 300, mpmath.inf]))
    assert v == pytest.approx(dppkernel.kernel_eval(kc, x, y), rel=1e-7)


def test_kernel_domain():
    with pytest.raises(DomainError):
        dppkernel.kernel_eval(3, -1.0, 1.0)


# -- biorthogonality -------------------------------------------------------------

@pytest.mark.parametrize("j, k, expected", [(0, 0, 1), (0, 1, 0), (1, 0, 0), (3, 1, 0), (5, 5, 1728000)])
def test_mellin_pairing_exact(j, k, expected):
    assert dppkernel.mellin_pairing_exact(j, k) == expected


def test_biorth_examples():
    assert dppkernel.biorth_check(0, 0) <= 1e-9
    assert dppkernel.biorth_check(0, 1) <= 1e-8
    r = dppkernel.biorth_matrix(21)
    assert float(r.integrals[5][5]) == pytest.approx(factorial(5) ** 3, rel=1e-8)


def test_biorth_matrix():
    r = dppkernel.biorth_matrix(21)
    assert r.max_offdiag <= 1e-8
    assert r.max_diag_relerr <= 1e-8
    assert float(r.exact_agreement.max()) <= 1e-8


def test_biorth_domain():
    with pytest.raises(DomainError):
        dppkernel.biorth_check(31, 0)


# -- joint densities -------------------------------------------------------------

def test_normalization():
    for N in range(1, 6):
        assert dppkernel.normalization_from_mellin(N) == dppkernel.normalization_exact(N)
    assert dppkernel.normalization_exact(2) == Fraction(1, 2)
    assert 2 * int(dppkernel._det_fraction(dppkernel.mellin_matrix(2))) == 2


def test_jpdf_n1():
    a = dppkernel.jpdf_one_matrix([0.25])
    b = dppkernel.jpdf_kernel_det([0.25])
    assert a.value == pytest.approx(0.84204888, rel=1e-7)  # 2 K_0(1)
    assert a.value == pytest.approx(rho0(0.25), rel=1e-14)
    assert b.value == pytest.approx(a.value, rel=1e-12)


def test_jpdf_n2_explicit():
    x1, x2 = 1.0, 3.0
    explicit = 0.5 * (x2 - x1) * (rho0(x1) * rho1(x2) - rho1(x1) * rho0(x2))
    assert dppkernel.jpdf_one_matrix([x1, x2]).value == pytest.approx(explicit, rel=1e-12)
    assert dppkernel.jpdf_kernel_det([x1, x2]).value == pytest.approx(explicit, rel=1e-8)


def test_jpdf_n2_mass():
    from scipy import integrate
    # expanding the 2x2 determinant, the mass over (0, inf)^2 is a00 a11 - a01 a10
    # with a_mk = int x^m rho_k, here by scipy quadrature
    rho = (rho0, rho1)
    a = [[integrate.quad(lambda x: x**m * rho[k](x), 0, np.inf, epsabs=1e-13, limit=200)[0]
          for k in range(2)] for m in range(2)]
    assert a[0][0] * a[1][1] - a[0][1] * a[1][0] == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_representations_agree(N):
    for pts in dppkernel.random_point_sets(N):
        a = dppkernel.jpdf_one_matrix(pts)
        b = dppkernel.jpdf_kernel_det(pts)
        assert a.sign == b.sign == 1
        assert abs(a.log_abs - b.log_abs) <= 1e-8


def test_kernel_det_nonnegative_n3():
    for pts in dppkernel.random_point_sets(3, seed=7):
        assert dppkernel.jpdf_kernel_det(pts).sign >= 0


def test_symmetry_and_coincidence():
    pts = [0.4, 1.7, 3.3]
    assert dppkernel.is_symmetric_jpdf(pts)
    assert dppkernel.is_symmetric_jpdf(pts, dppkernel.jpdf_kernel_det, rtol=1e-10)
    assert dppkernel.jpdf_one_matrix([1.0, 1.0]).sign == 0


def test_point_sets_spacing():
    for pts in dppkernel.random_point_sets(4, count=50, upper=0.01, min_spacing=1e-6):
        assert np.min(np.diff(pts)) >= 1e-6 and pts[0] > 0


# -- characteristic polynomial ---------------------------------------------------

def test_avg_char_poly_examples():
    assert dppkernel.avg_char_poly(1) == (-1, 1)
    r = dppkernel.avg_char_poly_check(2)
    assert r.passed and r.coeffs == (4, -8, 1)
    assert r.elementary == {"e1": 8, "e2": 4}


@pytest.mark.parametrize("N", range(1, 7))
def test_avg_char_poly_independent(N):
    # E[sum x_i] = E tr(P^* P) = N^3; E[prod x_i] = E|det X_1|^2 E|det X_2|^2 = (N!)^2
    c = dppkernel.avg_char_poly(N)
    assert -c[N - 1] == N**3
    assert (-1) ** N * c[0] == factorial(N) ** 2
    assert c == mop.p2_coeffs(N).coeffs


def test_finite_n_diag_matches_monte_carlo_near_soft_edge():
    # near x = 6 the N = 60 diagonal still sits visibly above the limit density;
    # an independent Monte Carlo of the N = 60 ensemble sides with the kernel
    from ginprod import ensemble
    from ginprod.quad import integrate_interval

    b = ensemble.run_batch(60, 8000, 7)
    per_trial = np.mean((b.values >= 5.8) & (b.values <= 6.2), axis=1)
    mc, se = per_trial.mean(), per_trial.std(ddof=1) / math.sqrt(per_trial.size)
    kernel = integrate_interval(lambda x: dppkernel.scaled_diag(60, x), 5.8, 6.2, 1e-9).value
    limit = limitlaw.mu_cdf(6.2) - limitlaw.mu_cdf(5.8)
    assert abs(kernel - mc) <= 3 * se
    assert abs(limit - mc) > 3 * se
