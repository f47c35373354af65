"""Kernel backend selection.

The compiled ``_ckernels`` module is used when it was built; otherwise the
numpy implementation in ``_pykernels``. Setting ``ORTHOEM_BACKEND=python``
forces the fallback at import time, and :func:`use_backend` switches at
runtime (tests and benchmarks compare the two).
"""
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_AVAILABLE = {"python": _pykernels}
if _ckernels is not None:
    _AVAILABLE["cython"] = _ckernels

_requested = os.environ.get("ORTHOEM_BACKEND", "").strip().lower()
if _requested and _requested not in _AVAILABLE:
    raise ImportError(f"ORTHOEM_BACKEND={_requested!r} is not available; have {sorted(_AVAILABLE)}")

NAME = _requested or ("cython" if "cython" in _AVAILABLE else "python")
kernels = _AVAILABLE[NAME]


def available() -> list[str]:
    return sorted(_AVAILABLE)


def use_backend(name: str) -> str:
    """Switch the active kernels; returns the previously active name."""
    global kernels, NAME
    if name not in _AVAILABLE:
        raise ValueError(f"backend {name!r} not available; have {available()}")
    prev = NAME
    NAME, kernels = name, _AVAILABLE[name]
    return prev
