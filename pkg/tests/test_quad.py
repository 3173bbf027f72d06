import math

import mpmath
import numpy as np
import pytest

from ginprod import limitlaw, specfun
from ginprod.quad import QuadratureError, integrate_de, integrate_interval, integrate_semi_infinite
from ginprod.verify import mellin_quadrature


def test_constant():
    r = integrate_interval(lambda x: 1.0, 0.0, 1.0)
    assert r.converged and r.value == pytest.approx(1.0, abs=1e-14)


def test_hard_edge_power():
    r = integrate_interval(lambda x: x ** (-2.0 / 3.0), 0.0, 1.0, 1e-12, (-2.0 / 3.0, None))
    assert r.converged and r.value == pytest.approx(3.0, abs=1e-11)


def test_limit_density_mass_with_edges():
    r = integrate_interval(lambda x: limitlaw.mu_density(x), 0.0, 27.0 / 4.0, 1e-10, (-2.0 / 3.0, 0.5))
    assert r.converged
    assert abs(r.value - 1.0) <= max(1e-10, 10 * r.abs_err_est)


def test_vectorized_matches_scalar():
    f = lambda x: np.exp(-x) * np.cos(3 * x)
    a = integrate_interval(f, 0.0, 2.0, 1e-12, vectorized=True)
    b = integrate_interval(lambda x: math.exp(-x) * math.cos(3 * x), 0.0, 2.0, 1e-12)
    assert a.value == pytest.approx(b.value, abs=1e-14)
    assert a.evaluations == b.evaluations


def test_exponential_semi_infinite():
    r = integrate_semi_infinite(lambda x: math.exp(-x), 1e-12)
    assert r.value == pytest.approx(1.0, abs=1e-12)


def test_rho0_mass():
    r = mellin_quadrature(0, 0)
    assert r.converged and r.value == pytest.approx(1.0, rel=1e-10)


def test_x_rho2():
    r = mellin_quadrature(1, 2)
    assert r.value == pytest.approx(6.0, rel=1e-10)


@pytest.mark.parametrize("m", range(11))
def test_mellin_oracle_grid(m):
    for k in range(11):
        r = mellin_quadrature(m, k)
        exact = specfun.rho_mellin_moment(m, k)
        assert abs(r.value - exact) / exact <= 1e-8, (m, k)


def test_tolerance_monotone():
    errs = []
    for tol in (1e-4, 1e-7, 1e-10):
        r = mellin_quadrature(3, 4, tol=tol)
        errs.append(abs(r.value - 144.0 * 24.0 / 24.0 * 6 / 6))  # 3! * 7! = 30240
    exact = 30240.0
    errs = [abs(mellin_quadrature(3, 4, tol=t).value - exact) for t in (1e-4, 1e-7, 1e-10)]
    assert errs[2] <= errs[1] <= errs[0] or errs[2] <= 1e-10 * exact


def test_converged_implies_error_bound():
    r = integrate_interval(lambda x: math.sqrt(x), 0.0, 1.0, 1e-9)
    assert r.converged and r.abs_err_est <= 1e-9


def test_budget_exhaustion_reports_not_converged():
    r = integrate_interval(lambda x: math.sin(1.0 / x) if x > 0 else 0.0, 0.0, 1.0, 1e-14, max_evals=300)
    assert not r.converged and r.evaluations <= 300


def test_nan_raises():
    with pytest.raises(QuadratureError):
        integrate_interval(lambda x: math.nan, 0.0, 1.0)


def test_bad_interval_and_exponent():
    with pytest.raises(QuadratureError):
        integrate_interval(lambda x: 1.0, 1.0, 0.0)
    with pytest.raises(QuadratureError):
        integrate_interval(lambda x: 1.0, 0.0, 1.0, 1e-8, (-1.0, None))


def test_de_euler_gamma():
    ctx = mpmath.mp.clone()
    ctx.dps = 40
    r = integrate_de(lambda x: ctx.exp(-x) * ctx.log(x), ctx=ctx)
    assert r.converged
    assert abs(r.value + ctx.euler) < ctx.mpf(10) ** -30


def test_de_vector_valued_mellin():
    ctx = mpmath.mp.clone()
    ctx.dps = 40
    r = integrate_de(lambda x: [x**m * 2 * ctx.besselk(0, 2 * ctx.sqrt(x)) for m in range(4)], ctx=ctx)
    for m, v in enumerate(r.value):
        assert abs(v - math.factorial(m) ** 2) < ctx.mpf(10) ** -30
