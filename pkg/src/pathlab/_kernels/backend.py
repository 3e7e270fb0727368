"""Kernel backend selection.

Hot numeric loops in this package exist in two flavours: a numba ``@njit``
version and a vectorised pure-numpy version.  The numba path is the default
whenever numba imports; setting the environment variable ``PATHLAB_NO_NUMBA``
to a non-empty value (anything but "0") forces the numpy fallback.  The choice
is made once at import time so that a process uses one backend consistently.

``benchmarks/bench_kernels.py`` times both paths side by side.
"""

import os

_flag = os.environ.get("PATHLAB_NO_NUMBA", "")
_forced_off = _flag not in ("", "0")

if _forced_off:
    NUMBA_ENABLED = False
else:
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is an install dependency
        NUMBA_ENABLED = False


def njit(*args, **kwargs):
    """numba.njit when the numba backend is active, identity otherwise.

    Usage matches numba: bare ``@njit`` or ``@njit(cache=True)``.  With the
    numpy backend the decorated function is returned unchanged, so modules may
    still call the loop version explicitly (e.g. in tests or benchmarks).
    """
    if NUMBA_ENABLED:
        from numba import njit as _njit

        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(func):
        return func

    return wrap


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
