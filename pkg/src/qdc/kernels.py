"""Kernel backend selection.

The compiled extension is used when it was built; ``QDC_PURE_PYTHON=1`` in the
environment forces the NumPy fallback.
"""

from __future__ import annotations

import contextlib
import os

from . import _kernels_py

_BACKENDS = {"numpy": _kernels_py}
try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None
else:
    _BACKENDS["cython"] = _compiled

if _compiled is not None and not os.environ.get("QDC_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "numpy"


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def get_backend(name: str | None = None):
    return _BACKENDS[name or BACKEND]


def set_backend(name: str) -> None:
    global BACKEND
    if name not in _BACKENDS:
        raise ValueError(f"kernel backend {name!r} unavailable; have {available_backends()}")
    BACKEND = name


@contextlib.contextmanager
def use_backend(name: str):
    previous = BACKEND
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def apply_superop_1q(rho, superop, q, n):
    return _BACKENDS[BACKEND].apply_superop_1q(rho, superop, q, n)


def apply_superop_2q(rho, superop, q0, q1, n):
    return _BACKENDS[BACKEND].apply_superop_2q(rho, superop, q0, q1, n)
