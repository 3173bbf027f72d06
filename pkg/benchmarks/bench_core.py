"""Compiled vs pure-Python kernels.

Run with ``python benchmarks/bench_core.py``.  Reports the median wall time
of each kernel on both backends, the speed-up, and the largest disagreement.
"""

import argparse
import statistics
import time

import numpy as np

from ginprod import _fallback, mop

try:
    from ginprod import _core
except ImportError:  # extension not built
    _core = None


def _time(fn, repeat):
    ts = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        ts.append(time.perf_counter() - t)
    return statistics.median(ts), out


def bench_k01(impl, zs):
    return lambda: [impl.k01_scaled(z) for z in zs]


def bench_recurrence(impl, x, arrays):
    return lambda: impl.recurrence_eval(x, *arrays)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--k", type=int, default=1000, help="polynomial degree")
    ap.add_argument("--points", type=int, default=4000, help="evaluation points")
    args = ap.parse_args(argv)
    if _core is None:
        print("compiled extension not available; nothing to compare")
        return 1
    zs = np.geomspace(1e-6, 600.0, 2000)
    arrays = mop._scaled_arrays(args.k, args.k, mop.Fraction(0), mop.Fraction(0))
    x = np.linspace(0.0, 6.75, args.points)
    cases = [
        ("k01_scaled x2000", lambda m: bench_k01(m, zs)),
        (f"recurrence_eval k={args.k}, {args.points} pts", lambda m: bench_recurrence(m, x, arrays)),
    ]
    print(f"{'kernel':40s} {'cython [s]':>12s} {'python [s]':>12s} {'speed-up':>9s} {'max rel diff':>13s}")
    for name, make in cases:
        tc, oc = _time(make(_core), args.repeat)
        tp, op = _time(make(_fallback), args.repeat)
        if isinstance(oc, list):
            a, b = np.array(oc), np.array(op)
        else:
            # compare signed log-magnitudes of the polynomial values
            a, b = oc[1], op[1]
        diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
        print(f"{name:40s} {tc:12.5f} {tp:12.5f} {tp / tc:9.1f} {diff:13.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
