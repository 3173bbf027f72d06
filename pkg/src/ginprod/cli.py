"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration
error, 3 runtime or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .config import SUITES, ConfigError, RunConfig, parse_grid, resolve_out, write_manifest

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _tol_pair(s):
    key, sep, val = s.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("expected KEY=VALUE")
    try:
        return key, float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance value {val!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ginprod", description="Products of two complex Ginibre matrices.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out=True, svg=True):
        sp.add_argument("--config", help="JSON config file (flags override it)")
        sp.add_argument("--tol", action="append", type=_tol_pair, default=[], metavar="KEY=VALUE",
                        help="override a default tolerance")
        if out:
            sp.add_argument("--out", help="output CSV path (relative paths go under $GINPROD_OUT_DIR)")
        if svg:
            sp.add_argument("--svg", help="also render a static SVG plot to this path")

    s = sub.add_parser("sample", help="Monte Carlo batch of scaled squared singular values")
    s.add_argument("--n", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int)
    common(s)

    s = sub.add_parser("density", help="limiting density and CDF on a grid")
    s.add_argument("--xi", type=float)
    s.add_argument("--grid", help="start:stop:count, inclusive")
    common(s)

    s = sub.add_parser("zeros", help="zeros of the scaled polynomial P_{k,n}")
    s.add_argument("--k", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--kappa", help="rational, e.g. 1/2")
    s.add_argument("--gamma", help="rational, e.g. 1")
    common(s)

    s = sub.add_parser("kernel", help="scaled kernel diagonal N K_N(N^2 x, N^2 x)")
    s.add_argument("--n-matrix", dest="n_matrix", type=int)
    s.add_argument("--grid", help="start:stop:count, inclusive")
    s.add_argument("--workers", type=int)
    common(s)

    s = sub.add_parser("verify", help="run a verification suite")
    s.add_argument("--suite", choices=SUITES)
    s.add_argument("--seed", type=int)
    s.add_argument("--report", help="JSON report path")
    s.add_argument("--workers", type=int)
    common(s, out=False, svg=False)

    s = sub.add_parser("compare", help="one-matrix (Marchenko-Pastur) vs two-matrix product")
    s.add_argument("--n", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int)
    common(s)
    return p


def _resolve(args) -> RunConfig:
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "tol")}
    for key, val in args.tol:
        flags["tol_" + key] = val
    return RunConfig.resolve(args.command, flags, args.config)


def _positive(params, *names):
    for n in names:
        v = params.get(n)
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ConfigError(f"--{n.replace('_', '-')} must be a positive integer, got {v!r}")


def _grid(spec):
    a, b, n = parse_grid(spec)
    return np.linspace(a, b, n)


def _write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([v if isinstance(v, (int, str)) else repr(float(v)) for v in r])


def _svg(cfg, series, **kw):
    from .svgplot import render

    if cfg.params.get("svg"):
        path = resolve_out(cfg.params["svg"])
        path.parent.mkdir(parents=True, exist_ok=True)
        render(series, path, **kw)
        return [path]
    return []


def cmd_sample(cfg: RunConfig) -> int:
    from . import ensemble, limitlaw

    p = cfg.params
    _positive(p, "n", "trials", "workers")
    if not 1 <= p["n"] <= ensemble.N_MAX:
        raise ConfigError(f"--n must be at most {ensemble.N_MAX}")
    if not isinstance(p["seed"], int) or not 0 <= p["seed"] < 2**64:
        raise ConfigError("--seed must be a 64-bit unsigned integer")
    out = resolve_out(p["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    batch = ensemble.run_batch(p["n"], p["trials"], p["seed"], workers=p["workers"])
    ks = ensemble.empirical_cdf(batch).ks_distance(limitlaw.mu_cdf)
    extra = [] if not p.get("svg") else [resolve_out(p["svg"])]
    mpath = ensemble.persist(batch, out, extra={"config": cfg.to_dict(), "outputs": [str(out)] + [str(e) for e in extra]})
    if p.get("svg"):
        xs = np.linspace(0.0, limitlaw.SOFT_EDGE + 0.25, 300)
        _svg(cfg, {"empirical": (xs, ensemble.empirical_cdf(batch).cdf(xs)), "limit": (xs, limitlaw.mu_cdf(xs))},
             title=f"N={p['n']}, {p['trials']} trials", ylabel="CDF")
    summary = {"N": p["n"], "trials": p["trials"], "seed": p["seed"], "mean": float(batch.values.mean()),
               "ks_mu": ks, "csv": str(out), "manifest": str(mpath)}
    print(json.dumps(summary))
    return EXIT_OK


def cmd_density(cfg: RunConfig) -> int:
    from . import limitlaw

    p = cfg.params
    xs = _grid(p["grid"])
    xi = float(p["xi"])
    if not xi > 0:
        raise ConfigError("--xi must be positive")
    pdf, cdf = limitlaw.mu_density(xs, xi), limitlaw.mu_cdf(xs, xi)
    out = resolve_out(p["out"])
    _write_csv(out, ["x", "pdf", "cdf"], zip(xs, pdf, cdf))
    outputs = [out] + _svg(cfg, {"density": (xs, pdf)}, title=f"limit density, xi={xi:g}", ylabel="pdf")
    write_manifest(out, cfg, outputs)
    print(json.dumps({"rows": len(xs), "csv": str(out), "cdf_last": float(cdf[-1])}))
    return EXIT_OK


def cmd_zeros(cfg: RunConfig) -> int:
    from . import mop

    p = cfg.params
    _positive(p, "k", "n")
    try:
        kappa, gamma = Fraction(str(p["kappa"])), Fraction(str(p["gamma"]))
    except (ValueError, ZeroDivisionError):
        raise ConfigError("--kappa and --gamma must be rationals such as 0, 1/2, 3") from None
    if p["k"] > mop.K_MAX_EXACT or not kappa > -1 or gamma < 0:
        raise ConfigError("need k <= 2000, kappa > -1, gamma >= 0")
    z = mop.zeros(p["k"], p["n"], kappa, gamma)
    k = len(z.zeros)
    out = resolve_out(p["out"])
    _write_csv(out, ["index", "zero", "counting_cdf"],
               ((i, v, (i + 1) / k) for i, v in enumerate(z.zeros)))
    outputs = [out] + _svg(cfg, {"counting CDF": (z.zeros, (np.arange(k) + 1) / k)},
                           title=f"zeros of P_(k={p['k']}, n={p['n']})", ylabel="CDF")
    write_manifest(out, cfg, outputs, {"refinement_residual": z.refinement_residual, "method": z.method})
    print(json.dumps({"k": k, "n": p["n"], "max_zero": float(z.zeros[-1]),
                      "refinement_residual": z.refinement_residual, "csv": str(out)}))
    return EXIT_OK


def cmd_kernel(cfg: RunConfig) -> int:
    from . import dppkernel, limitlaw

    p = cfg.params
    _positive(p, "n_matrix", "workers")
    if p["n_matrix"] > dppkernel.N_MAX:
        raise ConfigError(f"--n-matrix must be at most {dppkernel.N_MAX}")
    xs = _grid(p["grid"])
    if xs[0] <= 0:
        raise ConfigError("kernel grid must be strictly positive")
    N = p["n_matrix"]
    if p["workers"] > 1:
        with ThreadPoolExecutor(max_workers=p["workers"]) as pool:
            kd = np.array(list(pool.map(lambda x: dppkernel.scaled_diag(N, x), xs)))
    else:
        kd = dppkernel.scaled_diag(N, xs)
    md = limitlaw.mu_density(xs)
    out = resolve_out(p["out"])
    _write_csv(out, ["x", "scaled_diag", "mu_density"], zip(xs, kd, md))
    outputs = [out] + _svg(cfg, {f"N K_N, N={N}": (xs, kd), "limit": (xs, md)},
                           title="kernel diagonal vs limit density", ylabel="density")
    write_manifest(out, cfg, outputs)
    print(json.dumps({"N": N, "rows": len(xs), "csv": str(out)}))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    from .verify import report_passed, run_suite

    p = cfg.params
    if p["suite"] not in SUITES:
        raise ConfigError(f"unknown suite {p['suite']!r}")
    _positive(p, "workers")
    report = run_suite(p["suite"], cfg.tolerances, seed=int(p["seed"]), workers=p["workers"])
    path = resolve_out(p["report"] or f"verify_{p['suite']}.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(report, fh, indent=1)
        fh.write("\n")
    write_manifest(path, cfg, [path])
    ok = report_passed(report)
    for c in report["checks"]:
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['name']}  measured={c['measured']}  tol={c['tolerance']}")
    print(f"suite {p['suite']}: {'all passed' if ok else 'FAILED'}; report {path}")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_compare(cfg: RunConfig) -> int:
    from . import ensemble, limitlaw

    p = cfg.params
    _positive(p, "n", "trials", "workers")
    if p["n"] > ensemble.N_MAX:
        raise ConfigError(f"--n must be at most {ensemble.N_MAX}")
    one = ensemble.run_batch(p["n"], p["trials"], p["seed"], workers=p["workers"], factors=1)
    two = ensemble.run_batch(p["n"], p["trials"], p["seed"], workers=p["workers"], factors=2)
    e1, e2 = ensemble.empirical_cdf(one), ensemble.empirical_cdf(two)
    xs = np.linspace(0.0, 7.0, 281)
    cols = (e1.cdf(xs), limitlaw.mp_cdf(xs), e2.cdf(xs), limitlaw.mu_cdf(xs))
    out = resolve_out(p["out"])
    _write_csv(out, ["x", "empirical_cdf_m1", "marchenko_pastur_cdf", "empirical_cdf_m2", "mu_cdf"], zip(xs, *cols))
    outputs = [out] + _svg(cfg, {"M=1 empirical": (xs, cols[0]), "Marchenko-Pastur": (xs, cols[1]),
                                 "M=2 empirical": (xs, cols[2]), "M=2 limit": (xs, cols[3])},
                           title="one matrix vs product of two", ylabel="CDF")
    write_manifest(out, cfg, outputs)
    summary = {"N": p["n"], "trials": p["trials"], "seed": p["seed"],
               "ks_m1_marchenko_pastur": e1.ks_distance(limitlaw.mp_cdf),
               "ks_m2_mu": e2.ks_distance(limitlaw.mu_cdf),
               "mean_m1": float(one.values.mean()), "mean_m2": float(two.values.mean()), "csv": str(out)}
    print(json.dumps(summary))
    return EXIT_OK


COMMANDS = {
    "sample": cmd_sample,
    "density": cmd_density,
    "zeros": cmd_zeros,
    "kernel": cmd_kernel,
    "verify": cmd_verify,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _resolve(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"ginprod: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ArithmeticError, RuntimeError, ValueError) as exc:
        print(f"ginprod: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
