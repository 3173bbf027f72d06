import math
from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from ginprod import dppkernel, ensemble, limitlaw, mop, specfun
from ginprod.measures import CountingMeasure

params = st.tuples(
    st.sampled_from([Fraction(0), Fraction(1, 2), Fraction(1), Fraction(-1, 3), Fraction(5, 2)]),
    st.sampled_from([Fraction(0), Fraction(1), Fraction(2), Fraction(3, 2)]),
)


@settings(max_examples=40, deadline=None)
@given(k=st.integers(0, 25), p=params)
def test_recurrence_identity(k, p):
    assert all(c == 0 for c in mop.recurrence_residual(k, *p))


@settings(max_examples=40, deadline=None)
@given(k=st.integers(1, 30), p=params)
def test_coeffs_monic(k, p):
    poly = mop.coeffs_exact(k, *p)
    assert poly.is_monic and poly.degree == k


@settings(max_examples=25, deadline=None)
@given(k=st.integers(1, 40), n=st.integers(1, 40), p=params)
def test_zeros_simple_positive(k, n, p):
    z = mop.zeros(k, n, *p)
    assert len(z) == k and z.zeros[0] > 0 and np.all(np.diff(z.zeros) > 0)
    assert z.refinement_residual <= 1e-10


@settings(max_examples=50, deadline=None)
@given(g=st.integers(1, 60), x=st.floats(1e-6, 500.0))
def test_rho_recurrence(g, x):
    fam = specfun.rho(g + 1, x)
    lhs = fam.logs[g + 1]
    a, b = fam.logs[g], fam.logs[g - 1]
    rhs = math.log(g * math.exp(a.log_abs - lhs.log_abs) + x * math.exp(b.log_abs - lhs.log_abs))
    assert abs(rhs) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(x=st.floats(0.0, 8.0), xi=st.floats(0.2, 3.0))
def test_density_scaling(x, xi):
    a = limitlaw.mu_density(x, xi)
    b = limitlaw.mu_density(x / xi**2) / xi**2
    assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-300)
    assert math.isclose(limitlaw.mu_cdf(x, xi), limitlaw.mu_cdf(x / xi**2), abs_tol=1e-14)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0.0, 7.0), b=st.floats(0.0, 7.0))
def test_cdf_monotone(a, b):
    lo, hi = sorted((a, b))
    assert limitlaw.mu_cdf(lo) <= limitlaw.mu_cdf(hi)


@settings(max_examples=40, deadline=None)
@given(atoms=st.lists(st.floats(0.0, 10.0), min_size=1, max_size=50))
def test_ks_bounds(atoms):
    m = CountingMeasure(atoms)
    d = m.ks_distance(lambda x: limitlaw.mu_cdf(x))
    assert 0.0 <= d <= 1.0
    assert m.total_mass == 1.0


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), N=st.integers(1, 12))
def test_sampling_deterministic(seed, N):
    a = ensemble.sample_product_svals(N, seed)
    assert np.array_equal(a, ensemble.sample_product_svals(N, seed))
    assert np.all(a > 0) and np.all(np.diff(a) >= 0)


@settings(max_examples=15, deadline=None)
@given(pts=st.lists(st.floats(0.05, 10.0), min_size=2, max_size=3, unique=True), data=st.data())
def test_jpdf_symmetric_and_equivalent(pts, data):
    if np.min(np.diff(np.sort(pts))) < 1e-3:
        return
    perm = data.draw(st.permutations(pts))
    a, b = dppkernel.jpdf_one_matrix(pts), dppkernel.jpdf_one_matrix(perm)
    assert a.sign == b.sign == 1 and abs(a.log_abs - b.log_abs) <= 1e-12
    c = dppkernel.jpdf_kernel_det(perm)
    assert abs(a.log_abs - c.log_abs) <= 1e-8
