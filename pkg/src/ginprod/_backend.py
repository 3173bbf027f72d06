"""Select the compiled kernels when available, else the numpy fallback."""

import os

from . import _fallback

BACKEND = "python"
if os.environ.get("GINPROD_PURE_PYTHON") != "1":
    try:
        from . import _core as _impl
    except ImportError:  # extension not built
        _impl = _fallback
    else:
        BACKEND = "cython"
else:
    _impl = _fallback

k01_scaled = _impl.k01_scaled
recurrence_eval = _impl.recurrence_eval

__all__ = ["BACKEND", "k01_scaled", "recurrence_eval"]
