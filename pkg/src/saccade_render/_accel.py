"""Numba switch shared by the kernel module.

Set ``SACCADE_RENDER_DISABLE_NUMBA=1`` to force the pure-numpy kernels, e.g.
when debugging or on platforms without a working numba build.
"""

from __future__ import annotations

import os

_FLAG = "SACCADE_RENDER_DISABLE_NUMBA"

try:
    from numba import njit as _njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _njit = None
    NUMBA_AVAILABLE = False


def numba_disabled_by_env() -> bool:
    return os.environ.get(_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = NUMBA_AVAILABLE and not numba_disabled_by_env()


def maybe_njit(fn):
    """Compile ``fn`` with numba when available, else return it unchanged.

    The returned object is always callable, so the numba variants can still be
    exercised (as plain Python) on machines without numba.
    """
    if NUMBA_AVAILABLE:
        return _njit(cache=True, nogil=True)(fn)
    return fn
