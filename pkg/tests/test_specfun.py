import math

import mpmath
import numpy as np
import pytest

from ginprod import specfun
from ginprod.quad import integrate_semi_infinite
from ginprod.specfun import DomainError, LogReal


def test_k0_at_two():
    r = specfun.bessel_k(0, 2.0)
    assert r.value == pytest.approx(0.113893872749533, rel=1e-13)


@pytest.mark.parametrize("order,z", [(0, 2.0), (1, 0.3), (3, 1.7), (0, 0.01), (1, 500.0), (20, 5.0), (1, 1e-6), (7, 40.0)])
def test_bessel_matches_integral_oracle(order, z):
    r = specfun.bessel_k(order, z)
    oracle = specfun.bessel_k_integral(order, z)  # exp(z) K(z)
    rel = abs(r.log_abs + z - math.log(oracle))
    assert rel <= 1e-12
    # claimed bound is honest: |value - oracle| <= 10 * abs_err_est
    assert abs(r.value - oracle * math.exp(-z)) <= 10 * r.abs_err_est


def test_bessel_large_z_asymptote():
    z = 650.0
    r = specfun.bessel_k(1, z)
    lead = 0.5 * math.log(math.pi / (2 * z)) - z
    assert abs(r.log_abs - lead) < 1.0 / z


def test_bessel_recurrence_identity():
    nu, z = 3, 1.7
    k = [specfun.bessel_k(n, z).value for n in (nu - 1, nu, nu + 1)]
    assert k[2] - k[0] - (2 * nu / z) * k[1] == pytest.approx(0.0, abs=1e-12 * k[2])


def test_bessel_positive_and_decreasing():
    zs = np.geomspace(1e-10, 650.0, 300)
    for order in (0, 1, 5):
        logs = [specfun.bessel_k(order, z).log_abs for z in zs]
        assert all(np.diff(logs) < 0)


def test_bessel_overflow_goes_to_log_channel():
    r = specfun.bessel_k(400, 0.01)
    assert r.value is None and math.isinf(r.abs_err_est)
    with mpmath.workdps(30):
        assert r.log_abs == pytest.approx(float(mpmath.log(mpmath.besselk(400, 0.01))), rel=1e-13)


@pytest.mark.parametrize("bad", [0.0, -1.0, 1e-13, 701.0, math.nan, math.inf])
def test_bessel_domain(bad):
    with pytest.raises(DomainError):
        specfun.bessel_k(0, bad)


def test_bessel_order_domain():
    with pytest.raises(DomainError):
        specfun.bessel_k(513, 1.0)
    with pytest.raises(DomainError):
        specfun.bessel_k(1.5, 1.0)


def test_rho_values():
    fam = specfun.rho(3, 1.0)
    assert fam[0] == pytest.approx(0.227787745499, rel=1e-11)
    assert specfun.rho_value(3, 1e-10) == pytest.approx(2.0, rel=1e-6)
    x = 0.5
    f = specfun.rho(2, x)
    assert f[2] == pytest.approx(f[1] + x * f[0], rel=1e-14)


def test_rho_against_direct_bessel():
    for x in (1e-3, 0.1, 1.0, 10.0, 100.0):
        fam = specfun.rho(60, x)
        z = 2 * math.sqrt(x)
        for g in range(61):
            direct = math.log(2) + 0.5 * g * math.log(x) + specfun.bessel_k(g, z).log_abs
            assert fam.logs[g].log_abs == pytest.approx(direct, abs=1e-10 * max(1.0, abs(direct)))


def test_rho_large_order_overflow_safe():
    fam = specfun.rho(300, 2.0)
    assert fam.values[300] is None
    assert math.isfinite(fam.logs[300].log_abs)
    assert all(l.sign == 1 for l in fam.logs)


@pytest.mark.parametrize("g,x", [(1, 0.5), (2, 2.0), (4, 8.0)])
def test_rho_derivative_identity(g, x):
    h = 1e-6
    d = (specfun.rho_value(g, x + h) - specfun.rho_value(g, x - h)) / (2 * h)
    assert d == pytest.approx(-specfun.rho_value(g - 1, x), abs=1e-5)


def test_weight():
    assert specfun.weight_w2(0.0, 1.0) == pytest.approx(math.exp(-1))
    assert specfun.weight_w2(1.0, 1.0) == pytest.approx(math.exp(-2))
    with pytest.raises(DomainError):
        specfun.weight_w2(1.0, 0.0)


def test_weight_integrates_to_rho0():
    x = 2.0
    r = integrate_semi_infinite(lambda s: specfun.weight_w2(x, s), tol=1e-13, rtol=1e-12)
    assert r.value == pytest.approx(specfun.rho_value(0, x), rel=1e-9)


def test_mellin_moment():
    assert specfun.rho_mellin_moment(0, 0) == 1
    assert specfun.rho_mellin_moment(2, 0) == 4
    assert specfun.rho_mellin_moment(1, 2) == 6
    assert specfun.rho_mellin_moment(200, 200) == math.factorial(200) * math.factorial(400)
    with pytest.raises(DomainError):
        specfun.rho_mellin_moment(201, 0)


def test_logreal():
    assert LogReal.from_float(-2.0).value == pytest.approx(-2.0)
    assert LogReal(1, 800.0).value is None
    assert float(LogReal(1, 800.0)) == math.inf
    assert LogReal.from_float(0.0).value == 0.0


@pytest.mark.parametrize("z", [1e-8, 0.3, 2.0, 7.5, 33.0, 90.0, 400.0])
def test_bessel_k01_mp(z):
    ctx = mpmath.mp.clone()
    ctx.dps = 50
    k0, k1 = specfun.bessel_k01_mp(z, ctx)
    with mpmath.workdps(70):
        assert abs(k0 / mpmath.besselk(0, z) - 1) < mpmath.mpf(10) ** -48
        assert abs(k1 / mpmath.besselk(1, z) - 1) < mpmath.mpf(10) ** -48


def test_rho_family_mp_matches_double():
    vals = specfun.rho_family_mp(10, 3.0)
    for g, v in enumerate(vals):
        assert float(v) == pytest.approx(specfun.rho_value(g, 3.0), rel=1e-13)
