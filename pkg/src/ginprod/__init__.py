"""Squared singular values of products of two complex Ginibre matrices.

Exact multiple orthogonal polynomials, the finite-N correlation kernel, the
limiting density and a reproducible Monte Carlo sampler.
"""

__version__ = "0.1.0"

from ._backend import BACKEND  # noqa: E402

__all__ = ["BACKEND", "__version__"]
