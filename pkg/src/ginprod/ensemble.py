"""Monte Carlo for squared singular values of ``X_2 X_1`` (complex Ginibre).

Entries have density proportional to ``exp(-|z|^2)``, i.e. ``E|z|^2 = 1``.
Each trial owns a Philox stream keyed by a 64-bit mix of
``(master_seed, trial)``, so results do not depend on the number of workers
or the order in which trials finish.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .measures import CountingMeasure, ks_distance

SCHEMA_VERSION = 1
N_MAX = 2048
_MASK64 = (1 << 64) - 1
CSV_HEADER = ["trial", "index", "scaled_squared_singular_value"]


class TrialError(RuntimeError):
    """A trial failed; ``trial`` is its index."""

    def __init__(self, trial: int, cause: BaseException):
        super().__init__(f"trial {trial} failed: {cause}")
        self.trial = trial
        self.__cause__ = cause


class SchemaError(ValueError):
    """Batch manifest missing, malformed, or of an unknown schema version."""


def _code_version() -> str:
    from . import __version__

    return __version__


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def substream_seed(master_seed: int, trial: int) -> int:
    """Keyed 64-bit mix of ``(master_seed, trial)``."""
    if not 0 <= master_seed <= _MASK64:
        raise ValueError("master_seed must be a 64-bit unsigned integer")
    if trial < 0:
        raise ValueError("trial index must be nonnegative")
    return _splitmix64(_splitmix64(master_seed) ^ (trial & _MASK64))


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    # |z|^2 = -log(u1) is Exp(1); phase uniform.  u1 in (0, 1].
    u1 = 1.0 - rng.random(shape)
    u2 = rng.random(shape)
    return np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)


def _check_n(N):
    if isinstance(N, bool) or int(N) != N or not 1 <= N <= N_MAX:
        raise ValueError(f"N must be an integer in [1, {N_MAX}]")
    return int(N)


def _svals(factors: int, N: int, trial_seed: int, attempt: int) -> np.ndarray:
    key = trial_seed if attempt == 0 else _splitmix64(trial_seed ^ attempt)
    rng = np.random.Generator(np.random.Philox(key=key))
    P = _complex_gaussian(rng, (N, N))
    for _ in range(factors - 1):
        P = _complex_gaussian(rng, (N, N)) @ P
    s = np.linalg.svd(P, compute_uv=False)
    lam = np.sort(s * s) / float(N) ** factors
    if not np.all(lam > 0):
        raise np.linalg.LinAlgError("zero singular value")
    return lam


def _sample(factors: int, N: int, trial_seed: int) -> np.ndarray:
    N = _check_n(N)
    try:
        return _svals(factors, N, trial_seed, 0)
    except np.linalg.LinAlgError:
        return _svals(factors, N, trial_seed, 1)


def sample_product_svals(N: int, trial_seed: int) -> np.ndarray:
    """Sorted squared singular values of ``X_2 X_1`` divided by ``N^2``."""
    return _sample(2, N, trial_seed)


def sample_single_svals(N: int, trial_seed: int) -> np.ndarray:
    """Sorted squared singular values of one Ginibre matrix divided by ``N``."""
    return _sample(1, N, trial_seed)


@dataclass(frozen=True)
class SampleBatch:
    N: int
    trials: int
    master_seed: int
    values: np.ndarray
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    code_version: str = field(default_factory=_code_version)
    factors: int = 2

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.trials, self.N):
            raise ValueError(f"values shape {v.shape} != ({self.trials}, {self.N})")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __eq__(self, other):
        if not isinstance(other, SampleBatch):
            return NotImplemented
        return (
            (self.N, self.trials, self.master_seed, self.created_at, self.code_version, self.factors)
            == (other.N, other.trials, other.master_seed, other.created_at, other.code_version, other.factors)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def manifest(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "N": self.N,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "code_version": self.code_version,
            "created_at": self.created_at,
            "factors": self.factors,
        }


def run_batch(N: int, trials: int, master_seed: int, *, workers: int = 1, factors: int = 2) -> SampleBatch:
    """``trials`` independent draws; trial ``t`` uses ``substream_seed(master_seed, t)``."""
    N = _check_n(N)
    if isinstance(trials, bool) or int(trials) != trials or trials < 1:
        raise ValueError("trials must be a positive integer")
    if factors not in (1, 2):
        raise ValueError("only one or two factors are supported")
    trials = int(trials)
    out = np.empty((trials, N))

    def one(t):
        try:
            out[t] = _sample(factors, N, substream_seed(master_seed, t))
        except Exception as exc:  # attach the trial index
            raise TrialError(t, exc) from exc

    if workers <= 1:
        for t in range(trials):
            one(t)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for fut in [pool.submit(one, t) for t in range(trials)]:
                fut.result()
    return SampleBatch(N, trials, int(master_seed), out, factors=factors)


class EmpiricalCDF(CountingMeasure):
    """Pooled step CDF; callable."""

    def __call__(self, x):
        return self.cdf(x)


def empirical_cdf(batch: SampleBatch) -> EmpiricalCDF:
    return EmpiricalCDF(batch.values.ravel())


def pooled_moment_stats(batch: SampleBatch, m: int) -> tuple[float, float]:
    """Pooled ``m``-th moment and its standard error.

    The error is taken from the spread of per-trial means, since values
    within a trial are dependent.
    """
    per_trial = np.mean(batch.values**m, axis=1)
    mean = float(per_trial.mean())
    if batch.trials < 2:
        return mean, math.inf
    return mean, float(per_trial.std(ddof=1) / math.sqrt(batch.trials))


def manifest_path(csv_path) -> Path:
    p = Path(csv_path)
    stem = p.name[:-4] if p.name.endswith(".csv") else p.name
    return p.with_name(stem + ".manifest.json")


def persist(batch: SampleBatch, path, *, extra: dict | None = None) -> Path:
    """Write ``path`` (CSV) and its ``.manifest.json`` sidecar."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for t in range(batch.trials):
            for i, v in enumerate(batch.values[t]):
                w.writerow([t, i, repr(float(v))])
    man = batch.manifest()
    if extra:
        man.update(extra)
    mpath = manifest_path(path)
    with open(mpath, "w") as fh:
        json.dump(man, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return mpath


def load(path) -> SampleBatch:
    """Inverse of :func:`persist`; the manifest is validated before any data is read."""
    path = Path(path)
    mpath = manifest_path(path)
    try:
        with open(mpath) as fh:
            man = json.load(fh)
    except FileNotFoundError as exc:
        raise SchemaError(f"manifest {mpath} not found") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"manifest {mpath} is not valid JSON") from exc
    if man.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {man.get('schema_version')!r}")
    for key in ("N", "trials", "master_seed", "code_version", "created_at"):
        if key not in man:
            raise SchemaError(f"manifest lacks {key!r}")
    N, trials = int(man["N"]), int(man["trials"])
    values = np.empty((trials, N))
    seen = 0
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        if next(r, None) != CSV_HEADER:
            raise SchemaError("unexpected CSV header")
        for row in r:
            t, i = int(row[0]), int(row[1])
            values[t, i] = float(row[2])
            seen += 1
    if seen != N * trials:
        raise SchemaError(f"expected {N * trials} rows, found {seen}")
    return SampleBatch(N, trials, int(man["master_seed"]), values,
                       created_at=man["created_at"], code_version=man["code_version"],
                       factors=int(man.get("factors", 2)))


def default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))


__all__ = [
    "SampleBatch", "EmpiricalCDF", "TrialError", "SchemaError",
    "sample_product_svals", "sample_single_svals", "run_batch", "empirical_cdf",
    "ks_distance", "pooled_moment_stats", "persist", "load", "substream_seed",
]
