"""Backend selection for the hot kernels.

Set ``FRINGETREES_DISABLE_NUMBA=1`` to force the pure-numpy path. The flag is
read once at import time.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("FRINGETREES_DISABLE_NUMBA", "") in ("", "0")
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(func=None, *, cache=True):
    """Compile ``func`` with numba when available, else return it unchanged."""
    if func is None:
        return lambda f: njit(f, cache=cache)
    if HAVE_NUMBA:
        return numba.njit(cache=cache, nogil=True)(func)
    return func
