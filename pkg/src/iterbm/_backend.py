"""Backend selection for the hot kernels.

``ITERBM_BACKEND=numpy`` forces the pure-numpy path; anything else (or unset)
uses numba when it is importable.
"""
import os
import warnings

_requested = os.environ.get("ITERBM_BACKEND", "numba").strip().lower()

try:
    import numba  # noqa: F401
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is present in dev environments
    HAVE_NUMBA = False
    if _requested == "numba":
        warnings.warn("numba is not installed; falling back to numpy kernels")

USE_NUMBA = HAVE_NUMBA and _requested != "numpy"

numba_opts = {
    "nogil": True,
    "cache": True,
    "fastmath": False,
    "boundscheck": False,
}


def njit(func):
    """``numba.njit`` with project defaults, or the identity without numba."""
    if not HAVE_NUMBA:
        return func
    import numba
    return numba.njit(**numba_opts)(func)


def set_backend(name):
    """Switch backends at runtime (used by tests and the benchmark)."""
    global USE_NUMBA
    name = name.lower()
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    USE_NUMBA = name == "numba"


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
