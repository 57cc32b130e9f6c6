"""Numba toggle for the numeric kernels.

Kernels are written once as plain Python over numpy arrays. When numba is
importable and ``RANKENUM_DISABLE_NUMBA`` is unset (or ``0``), they are
compiled with ``numba.njit``; otherwise the same source runs in the
interpreter. The uncompiled function stays reachable as ``kernel.py_func``
in both modes so tests can compare the two paths. A kernel may name a
vectorized numpy replacement with ``jit(fallback=...)``; it is then used
instead of the interpreted loop when numba is off.
"""

from __future__ import annotations

import os

_FLAG = "RANKENUM_DISABLE_NUMBA"


def numba_requested() -> bool:
    return os.environ.get(_FLAG, "0").strip().lower() in ("", "0", "false", "no")


try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAS_NUMBA = _numba is not None
USE_NUMBA = HAS_NUMBA and numba_requested()


class _Interpreted:
    """Stand-in with the dispatcher's ``py_func`` attribute."""

    def __init__(self, fn):
        self.py_func = fn
        self.__name__ = fn.__name__
        self.__doc__ = fn.__doc__
        self.__wrapped__ = fn

    def __call__(self, *args):
        return self.py_func(*args)


def jit(fn=None, *, fallback=None):
    def wrap(f):
        if USE_NUMBA:
            return _numba.njit(cache=True, nogil=True)(f)
        if fallback is not None:
            return _Vectorized(f, fallback)
        return _Interpreted(f)

    return wrap(fn) if fn is not None else wrap


class _Vectorized(_Interpreted):
    def __init__(self, fn, vec):
        super().__init__(fn)
        self.vectorized = vec

    def __call__(self, *args):
        return self.vectorized(*args)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "python"
