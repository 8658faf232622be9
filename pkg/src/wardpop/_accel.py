"""Numba availability and backend selection.

Hot kernels exist twice: a loop version compiled with ``numba.njit`` and a
vectorised pure-numpy version. ``WARDPOP_DISABLE_NUMBA=1`` forces the numpy
path; it is read on every dispatch so tests can flip it with monkeypatch.
"""
import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

ENV_FLAG = "WARDPOP_DISABLE_NUMBA"


def njit(fn):
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def use_numba():
    if not HAVE_NUMBA:
        return False
    return os.environ.get(ENV_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


def backend_name():
    return "numba" if use_numba() else "numpy"
