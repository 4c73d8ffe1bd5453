"""Kernel dispatch: compiled Cython core with a pure-numpy fallback.

The compiled module is preferred when importable; set the environment
variable ``CONFUSION_LENS_PURE=1`` to force the fallback (useful for
benchmarking and debugging).
"""

import os

from . import _pykernels

if os.environ.get("CONFUSION_LENS_PURE"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pykernels

KERNEL_IMPLEMENTATION = _impl.IMPLEMENTATION

local_maxima_prominences = _impl.local_maxima_prominences
midrank = _impl.midrank
spearman_rho = _impl.spearman_rho

__all__ = [
    "KERNEL_IMPLEMENTATION",
    "local_maxima_prominences",
    "midrank",
    "spearman_rho",
]
