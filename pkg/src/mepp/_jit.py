"""Numba switch.

Kernels are written once and decorated with :func:`njit`. When numba is
importable and ``MEPP_DISABLE_NUMBA`` is unset (or ``0``), they compile to
native code; otherwise the decorator is the identity and the same source
runs as plain Python over numpy arrays.
"""

import os

_FLAG = os.environ.get("MEPP_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError
    import numba as _numba

    USE_NUMBA = True
except ImportError:
    _numba = None
    USE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` with ``cache`` and ``nogil`` on, or a no-op."""
    if USE_NUMBA:
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        return _numba.njit(*args, **kwargs)

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrapper(f):
        return f

    return wrapper


def py_func(f):
    """Return the uncompiled Python source of a kernel."""
    return getattr(f, "py_func", f)
