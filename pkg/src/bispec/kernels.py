"""Kernel dispatch: compiled extension when importable, numpy otherwise.

Set ``BISPEC_PURE=1`` in the environment to force the numpy fallback.
``BACKEND`` names the implementation that was selected at import.
"""
import os

import numpy as np

from . import _kernels_py

if os.environ.get("BISPEC_PURE", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"


def _vec(y):
    return np.ascontiguousarray(y, dtype=np.complex128)


def _grid(bf):
    return np.ascontiguousarray(bf, dtype=np.complex128)


def _mask(mask):
    return np.ascontiguousarray(mask, dtype=np.uint8)


def bispectrum(y, impl=None):
    return (impl or _impl).bispectrum(_vec(y))


def objective(y, bf, mask, impl=None):
    return (impl or _impl).objective(_vec(y), _grid(bf), _mask(mask))


def gradient(y, bf, mask, block, impl=None):
    block = np.ascontiguousarray(block, dtype=np.intp)
    return (impl or _impl).gradient(_vec(y), _grid(bf), _mask(mask), block)
