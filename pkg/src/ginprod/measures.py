"""Finite point measures with equal weights and their comparators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class CountingMeasure:
    """Uniform probability measure on a sorted set of atoms."""

    atoms: np.ndarray

    def __post_init__(self):
        a = np.sort(np.asarray(self.atoms, dtype=float).ravel())
        if a.size == 0:
            raise ValueError("a counting measure needs at least one atom")
        a.setflags(write=False)
        object.__setattr__(self, "atoms", a)

    @property
    def weight_per_atom(self) -> float:
        return 1.0 / self.atoms.size

    @property
    def total_mass(self) -> float:
        return self.atoms.size * self.weight_per_atom

    def __len__(self) -> int:
        return self.atoms.size

    def cdf(self, x):
        """Right-continuous step CDF."""
        return np.searchsorted(self.atoms, x, side="right") / self.atoms.size

    def moment(self, m: int) -> float:
        return float(np.mean(self.atoms**m))

    def ks_distance(self, target_cdf: Callable, target_cdf_left: Callable | None = None) -> float:
        return ks_distance(self, target_cdf, target_cdf_left)


def ks_distance(
    measure: CountingMeasure,
    target_cdf: Callable,
    target_cdf_left: Callable | None = None,
) -> float:
    """Sup-distance between the step CDF of ``measure`` and ``target_cdf``.

    Both one-sided gaps are checked at every atom.  ``target_cdf`` must accept
    arrays.  For targets with jumps pass ``target_cdf_left`` (the left limit);
    a continuous target is assumed otherwise.
    """
    x = measure.atoms
    n = x.size
    f = np.asarray(target_cdf(x), dtype=float)
    f_left = f if target_cdf_left is None else np.asarray(target_cdf_left(x), dtype=float)
    # empirical CDF just after and just before each atom, ties grouped
    after = np.searchsorted(x, x, side="right") / n
    before = np.searchsorted(x, x, side="left") / n
    d = max(np.max(np.abs(after - f)), np.max(np.abs(before - f_left)))
    return float(d)
