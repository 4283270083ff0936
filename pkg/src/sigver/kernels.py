"""Backend selection for the hot pixel loops.

The environment variable SIGVER_NUMBA picks the implementation:

  unset / "auto"  use numba when importable, else the numpy fallback
  "0"             force the pure numpy backend
  "1"             require numba (import error if unavailable)

Both backends produce bit-identical results; see `benchmarks/bench_kernels.py`
for a speed comparison.
"""

import os

from . import _kernels_numpy

__all__ = [
    "BACKEND",
    "median3",
    "dilate",
    "erode",
    "hit_or_miss",
    "count_isolated",
    "count_components8",
    "resample_catmull_rom",
    "thin_stable",
]


def _select():
    flag = os.environ.get("SIGVER_NUMBA", "auto").strip().lower()
    if flag in ("0", "false", "off", "no"):
        return _kernels_numpy, "numpy"
    try:
        from . import _kernels_numba
        return _kernels_numba, "numba"
    except ImportError:
        if flag in ("1", "true", "on", "yes"):
            raise
        return _kernels_numpy, "numpy"


_impl, BACKEND = _select()

median3 = _impl.median3
dilate = _impl.dilate
erode = _impl.erode
hit_or_miss = _impl.hit_or_miss
count_isolated = _impl.count_isolated
count_components8 = _impl.count_components8
resample_catmull_rom = _impl.resample_catmull_rom
thin_stable = _impl.thin_stable
