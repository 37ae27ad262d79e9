"""Optional numba acceleration.

Set ``ADSCMC_DISABLE_NUMBA=1`` to force the pure numpy code paths.  The flag
is read once at import time; ``use_numba()`` reports the active choice.
"""
import os

_DISABLED = os.environ.get("ADSCMC_DISABLE_NUMBA", "0").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    import numba

    njit = numba.njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised by the env flag
    numba = None
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


def use_numba():
    return HAVE_NUMBA
