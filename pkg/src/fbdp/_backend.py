"""Numba/numpy backend selection for the hot kernels.

Set FBDP_DISABLE_NUMBA=1 to force the pure-numpy code path (same source,
no JIT).  The choice is made once at import time.
"""

import functools
import os

import numpy as np

DISABLE_NUMBA = os.environ.get("FBDP_DISABLE_NUMBA", "0") not in ("", "0")

if not DISABLE_NUMBA:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover
        DISABLE_NUMBA = True

USING_NUMBA = not DISABLE_NUMBA


def maybe_njit(*args, **kwargs):
    """@njit when numba is active, otherwise a thin wrapper that silences
    uint64 wraparound warnings (the RNG relies on modular arithmetic)."""

    def decorate(func):
        if USING_NUMBA:
            return _njit(cache=True, **kwargs)(func)

        @functools.wraps(func)
        def wrapper(*a, **kw):
            with np.errstate(over="ignore"):
                return func(*a, **kw)

        wrapper.py_func = func
        return wrapper

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return decorate(args[0])
    return decorate
