"""Backend switch for the compiled kernels.

Set ``SPECMONO_DISABLE_NUMBA=1`` before import to run every kernel through
its pure-numpy path. Numba being absent has the same effect.
"""

from __future__ import annotations

import os

_FLAG = "SPECMONO_DISABLE_NUMBA"


def _disabled_by_env() -> bool:
    return os.environ.get(_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and not _disabled_by_env()


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise.

    The compiled variant is built whenever numba exists, even if the env flag
    disables it, so benchmarks can compare both paths in one process.
    """

    def wrap(func):
        if not HAVE_NUMBA:
            return func
        kwargs.setdefault("cache", True)
        return _numba.njit(**kwargs)(func)

    if args and callable(args[0]):
        return wrap(args[0])
    return wrap


def jitable(func):
    """Mark a helper as callable both from Python and from compiled kernels."""
    if not HAVE_NUMBA:
        return func
    from numba.extending import register_jitable

    return register_jitable(func)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
