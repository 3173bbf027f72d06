import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

import ginprod
from ginprod import _backend, _fallback, mop

try:
    from ginprod import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled extension not built")


def test_backend_reported():
    assert ginprod.BACKEND in ("cython", "python")
    assert ginprod.BACKEND == ("cython" if _core is not None and os.environ.get("GINPROD_PURE_PYTHON") != "1"
                               else "python")


@needs_core
def test_k01_backends_agree():
    for z in np.geomspace(1e-12, 700, 2000):
        a0, a1 = _core.k01_scaled(float(z))
        b0, b1 = _fallback.k01_scaled(float(z))
        assert a0 == pytest.approx(b0, rel=1e-14) and a1 == pytest.approx(b1, rel=1e-14)


@needs_core
@pytest.mark.parametrize("k, n", [(5, 1), (60, 60), (400, 400)])
def test_recurrence_backends_agree(k, n):
    b, c, d = mop._scaled_arrays(k, n, Fraction(0), Fraction(0))
    x = np.linspace(1e-6, 8.0, 777)
    sa, la, ta = _core.recurrence_eval(x, b, c, d)
    sb, lb, tb = _fallback.recurrence_eval(x, b, c, d)
    assert np.array_equal(sa, sb)
    assert np.allclose(la, lb, rtol=1e-13, atol=1e-12)
    assert np.allclose(ta, tb, rtol=1e-10, atol=1e-300)


def test_fallback_k01_vs_scipy():
    from scipy import special
    for z in np.geomspace(1e-10, 600, 500):
        k0, k1 = _fallback.k01_scaled(float(z))
        assert k0 == pytest.approx(special.k0e(z), rel=1e-13)
        assert k1 == pytest.approx(special.k1e(z), rel=1e-13)


def test_pure_python_selected_by_env():
    code = "import ginprod, ginprod._backend as b; print(ginprod.BACKEND, b.recurrence_eval.__module__)"
    env = dict(os.environ, GINPROD_PURE_PYTHON="1")
    r = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert r.stdout.split() == ["python", "ginprod._fallback"]


def test_pure_python_results_match():
    code = ("import ginprod.mop as m; z = m.zeros(30, 30).zeros; "
            "print(repr(float(z[0])), repr(float(z[-1])))")
    env = dict(os.environ, GINPROD_PURE_PYTHON="1")
    r = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    lo, hi = map(float, r.stdout.split())
    z = mop.zeros(30, 30).zeros
    assert lo == pytest.approx(z[0], rel=1e-12) and hi == pytest.approx(z[-1], rel=1e-12)
