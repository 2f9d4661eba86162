"""Numba switch.

Set ``GBSM_DISABLE_NUMBA=1`` before import to force the pure-numpy kernels.
"""
import functools
import os

_DISABLED = os.environ.get("GBSM_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLED

# fastmath stays off: sweeps must be bit-reproducible.
if HAVE_NUMBA:
    njit = functools.partial(numba.njit, cache=True, nogil=True, fastmath=False)
else:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
