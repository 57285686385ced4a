"""Kernel backend selection.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
numpy fallback in ``_pykernels``.  :func:`use_backend` switches at runtime
(tests and the benchmark run both).
"""
from __future__ import annotations

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

AVAILABLE = ("cython", "python") if _ckernels is not None else ("python",)
BACKEND = AVAILABLE[0]
_impl = _ckernels if _ckernels is not None else _pykernels


def use_backend(name: str) -> None:
    global BACKEND, _impl
    if name not in AVAILABLE:
        raise ValueError(f"kernel backend {name!r} unavailable; have {AVAILABLE}")
    BACKEND = name
    _impl = _ckernels if name == "cython" else _pykernels


def aberth(coeffs, init, tol, max_iter):
    return _impl.aberth(coeffs, init, float(tol), int(max_iter))


def poly_logabs(coeffs, points):
    return _impl.poly_logabs(coeffs, points)
