"""Backend switch for the hot numeric kernels.

Kernels are compiled with numba when it is importable. Setting the
environment variable ``QDISCORD_PURE_NUMPY=1`` before import selects the
vectorised numpy implementations instead, which is also the automatic
fallback when numba is missing.
"""

import os

_FLAG = "QDISCORD_PURE_NUMPY"


def _env_forces_numpy():
    return os.environ.get(_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


try:
    import numba as _numba
except ImportError:  # pragma: no cover - depends on environment
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and not _env_forces_numpy()
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(func):
    """Compile ``func`` in nopython mode if numba is available.

    Without numba the plain Python function is returned, so the loop
    kernels stay importable (and testable against the numpy path).
    """
    if _numba is None:
        return func
    return _numba.njit(cache=True)(func)
