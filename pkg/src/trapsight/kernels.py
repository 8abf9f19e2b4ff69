"""Kernel backend selection.

The per-pixel hot loops (thresholding, absolute difference, pixel-equality
counting and connected-component statistics) exist twice: a compiled Cython
extension (``trapsight._kernels``) and a pure numpy fallback
(``trapsight._kernels_py``). The compiled backend is preferred when it
imported successfully; set ``TRAPSIGHT_PURE_PYTHON=1`` to force the
fallback. ``benchmarks/bench_kernels.py`` compares the two.

Both backends expose:

    threshold_u8(gray, t)    -> uint8 (h, w) in {0, 255}, 255 where gray <= t
    absdiff_u8(a, b)         -> uint8 (h, w) per-pixel |a - b|
    equal_count(a, b)        -> number of positions where a == b
    label_stats(mask)        -> (n, areas, min_x, min_y, max_x, max_y,
                                 sum_x, sum_y) over 8-connected components
                                of the nonzero pixels, arbitrary order
"""

from __future__ import annotations

import os

from . import _kernels_py

_FORCE_PY = os.environ.get("TRAPSIGHT_PURE_PYTHON", "").lower() in {"1", "true", "yes"}

if _FORCE_PY:
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND_NAME

threshold_u8 = _impl.threshold_u8
absdiff_u8 = _impl.absdiff_u8
equal_count = _impl.equal_count
label_stats = _impl.label_stats
