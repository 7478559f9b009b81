"""Backend selection for the hot kernels.

Set ``KSLAB_NO_NUMBA=1`` to force the pure-numpy code paths. When numba is
not importable the numpy paths are used automatically.
"""

import os

_DISABLE = os.environ.get("KSLAB_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _DISABLE


def njit(func):
    """Compile ``func`` with numba if available, else return it unchanged.

    The undecorated function is kept on ``.py_func`` either way so callers
    can reach the interpreted version.
    """
    if not HAVE_NUMBA:
        func.py_func = func
        return func
    return numba.njit(cache=True, fastmath=False)(func)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
