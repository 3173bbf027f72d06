"""Run configuration: defaults, JSON config files, flag overrides.

Resolution order (later wins): built-in defaults, the ``--config`` JSON file,
explicit command-line flags.  The resolved configuration is written into
every output manifest.

Default tolerances
------------------

=====================  ========  ==============================================
key                    default   meaning
=====================  ========  ==============================================
mellin_rel             1e-8      quadrature of x^m rho_k vs m!(m+k)!, relative
bessel_rel             1e-13     K_nu vs the integral oracle, relative
rho_recurrence_rel     1e-10     rho_{g+1} - g rho_g - x rho_{g-1}, relative
biorth                 1e-8      normalised biorthogonality residual
trace_abs              1e-6      |int K_N(x,x) dx - N|
jpdf_rel               1e-8      one-matrix vs kernel-determinant jpdf
zeros_residual         1e-10     Newton correction |P/P'| at computed zeros
zeros_ks               0.02      KS(zero measure of P_{400,400}, mu) bound
zeros_max              7.0       largest zero of P_{400,400}
mc_ks                  0.05      KS(empirical, mu) for N=200, 100 trials
mc_moment_se           3.0       moment deviation in standard errors
kernel_rel             0.10      |N K_N(N^2 x, N^2 x) / mu(x) - 1| at N=60
moment_rel             1e-6      quadrature moments vs Fuss-Catalan
edge_rel               1e-3      hard/soft edge constants
mass_abs               1e-10     total mass of the limiting density
=====================  ========  ==============================================
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__

COMMANDS = ("sample", "density", "zeros", "kernel", "verify", "compare")
SUITES = ("exact", "specfun", "biorth", "zeros", "montecarlo", "kernel", "all")
OUT_DIR_ENV = "GINPROD_OUT_DIR"
MANIFEST_SCHEMA_VERSION = 1

DEFAULT_TOLERANCES: dict[str, float] = {
    "mellin_rel": 1e-8,
    "bessel_rel": 1e-13,
    "rho_recurrence_rel": 1e-10,
    "biorth": 1e-8,
    "trace_abs": 1e-6,
    "jpdf_rel": 1e-8,
    "zeros_residual": 1e-10,
    "zeros_ks": 0.02,
    "zeros_max": 7.0,
    "mc_ks": 0.05,
    "mc_moment_se": 3.0,
    "kernel_rel": 0.10,
    "moment_rel": 1e-6,
    "edge_rel": 1e-3,
    "mass_abs": 1e-10,
}

DEFAULT_PARAMS: dict[str, dict] = {
    "sample": {"n": 200, "trials": 100, "seed": 42, "workers": 1, "out": "batch.csv", "svg": None},
    "density": {"xi": 1.0, "grid": "0:6.75:1000", "out": "density.csv", "svg": None},
    "zeros": {"k": 400, "n": 400, "kappa": "0", "gamma": "0", "out": "zeros.csv", "svg": None},
    "kernel": {"n_matrix": 40, "grid": "0.25:6.5:64", "workers": 1, "out": "kernel.csv", "svg": None},
    "verify": {"suite": "all", "seed": 42, "report": None, "workers": 1},
    "compare": {"n": 200, "trials": 100, "seed": 42, "workers": 1, "out": "compare.csv", "svg": None},
}


class ConfigError(ValueError):
    """Invalid configuration (maps to exit code 2)."""


def parse_grid(spec: str) -> tuple[float, float, int]:
    """``start:stop:count`` with inclusive endpoints."""
    parts = str(spec).split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must look like start:stop:count, got {spec!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad grid {spec!r}: {exc}") from None
    if n < 1 or (n > 1 and not a < b):
        raise ConfigError(f"grid {spec!r} needs start < stop and count >= 1")
    return a, b, n


def resolve_out(path: str | os.PathLike) -> Path:
    """Relative output paths are placed under ``$GINPROD_OUT_DIR`` when set."""
    p = Path(path)
    base = os.environ.get(OUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    config_file: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def resolve(cls, command: str, flags: dict, config_file: str | None = None) -> "RunConfig":
        """Merge defaults, the JSON file and non-``None`` flags."""
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}")
        params = dict(DEFAULT_PARAMS[command])
        tols = dict(DEFAULT_TOLERANCES)
        if config_file is not None:
            try:
                with open(config_file) as fh:
                    data = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config file {config_file}: {exc}") from None
            if not isinstance(data, dict):
                raise ConfigError("config file must hold a JSON object")
            file_tols = data.pop("tolerances", {})
            section = data.pop(command, {})
            for src in (data, section):
                for k, v in src.items():
                    if k in params:
                        params[k] = v
            for k, v in file_tols.items():
                if k not in tols:
                    raise ConfigError(f"unknown tolerance {k!r}")
                tols[k] = float(v)
        for k, v in flags.items():
            if v is None:
                continue
            if k.startswith("tol_"):
                key = k[4:]
                if key not in tols:
                    raise ConfigError(f"unknown tolerance {key!r}")
                tols[key] = float(v)
            elif k in params:
                params[k] = v
        return cls(command, params, tols, config_file)


def write_manifest(path: Path, config: RunConfig, outputs: list, extra: dict | None = None) -> Path:
    """``<stem>.manifest.json`` next to ``path``."""
    name = path.name
    stem = name[: -len(path.suffix)] if path.suffix else name
    mpath = path.with_name(stem + ".manifest.json")
    man = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "code_version": __version__,
        "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": config.to_dict(),
        "outputs": [str(o) for o in outputs],
    }
    if extra:
        man.update(extra)
    with open(mpath, "w") as fh:
        json.dump(man, fh, indent=1, sort_keys=True, default=str)
        fh.write("\n")
    return mpath
