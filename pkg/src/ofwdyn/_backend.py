"""Selects the trajectory kernel implementation at import time.

The compiled Cython kernels are used when the extension built; otherwise the
pure-Python round loop in ``learners`` serves as the fallback.  Set
``OFWDYN_BACKEND=python`` to force the fallback or ``OFWDYN_BACKEND=cython``
to fail loudly when the extension is missing.
"""

import os

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

_ENV = os.environ.get("OFWDYN_BACKEND", "auto")
if _ENV not in ("auto", "python", "cython"):
    raise RuntimeError(f"OFWDYN_BACKEND must be auto, python or cython, got {_ENV!r}")
if _ENV == "cython" and _compiled is None:
    raise RuntimeError("OFWDYN_BACKEND=cython but the compiled kernels are unavailable")


def compiled_available() -> bool:
    return _compiled is not None


def active_name() -> str:
    if _ENV == "python" or _compiled is None:
        return "python"
    return "cython"


def kernel_module(override: str | None = None):
    """The compiled kernel module to use, or None for the Python loop."""
    choice = _ENV if override is None else override
    if choice == "python":
        return None
    if choice == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels requested but unavailable")
        return _compiled
    return _compiled
