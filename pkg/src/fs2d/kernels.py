"""Hot-loop kernels: compiled Cython core when available, numpy otherwise.

Set ``FS2D_PURE_PYTHON=1`` to force the numpy fallback. ``BACKEND`` names the
implementation that was selected at import.
"""
import os

from . import _fallback

if os.environ.get("FS2D_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

bilinear_sample = _impl.bilinear_sample
polar_sample = _impl.polar_sample
greedy_peaks = _impl.greedy_peaks
splat_max = _impl.splat_max

__all__ = ["BACKEND", "bilinear_sample", "polar_sample", "greedy_peaks", "splat_max"]
