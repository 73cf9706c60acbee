"""Numba switch.

Hot kernels are compiled with ``numba.njit`` when numba imports and the
environment variable ``QUDITFORGE_NUMBA`` is not set to a false value
("0", "false", "no", "off").  Otherwise the same kernels fall back to
their pure-numpy implementations.
"""

import os

_FALSY = {"0", "false", "no", "off"}

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("QUDITFORGE_NUMBA", "1").strip().lower() not in _FALSY

_NJIT_KWARGS = dict(cache=True, nogil=True)


def njit(func):
    """Compile ``func`` with numba when enabled, else return it unchanged.

    The undecorated function is kept as ``func.py_func`` either way so
    tests and benchmarks can reach the interpreted version.
    """
    if not USE_NUMBA:
        func.py_func = func
        return func
    return numba.njit(**_NJIT_KWARGS)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
