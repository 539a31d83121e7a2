"""Optional numba acceleration.

Set ``NSGALERKIN_NUMBA=0`` in the environment to force the pure-numpy
kernels.  When numba is not importable the numpy path is used silently.
"""
import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _flag_enabled() -> bool:
    value = os.environ.get("NSGALERKIN_NUMBA", "1").strip().lower()
    return value not in ("0", "false", "no", "off")


USE_NUMBA = HAVE_NUMBA and _flag_enabled()


def njit(func):
    """``numba.njit(cache=True)`` when numba is available, identity otherwise."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True)(func)
