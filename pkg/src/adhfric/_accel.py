"""JIT switch for the numeric kernels.

Set ``ADHFRIC_DISABLE_NUMBA=1`` before import to run every kernel through its
pure-numpy / interpreted path.
"""
import os

USE_NUMBA = os.environ.get("ADHFRIC_DISABLE_NUMBA", "0").lower() not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        import numba
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


def njit(func=None, **kws):
    """``numba.njit(cache=True)`` when enabled, identity otherwise."""
    def wrap(f):
        if not USE_NUMBA:
            return f
        kws.setdefault("cache", True)
        return numba.njit(**kws)(f)

    if callable(func):
        return wrap(func)
    return wrap
