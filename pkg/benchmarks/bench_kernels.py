#!/usr/bin/env python3
"""Time the numba kernels against the pure numpy fallback.

Runs every hot kernel on a signature-scale workload with both backends
(ignoring SIGVER_NUMBA), checks that the outputs agree exactly, and prints a
table of per-call times and speedups.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from sigver import _kernels_numpy as np_impl
from sigver.preprocess import _GOLAY_BG, _GOLAY_FG, DISK1

try:
    from sigver import _kernels_numba as nb_impl
except ImportError:
    nb_impl = None


def signature_like(rng, h, w):
    """A stroke-ish binary image; random noise understates morphology cost."""
    mask = np.zeros((h, w), dtype=bool)
    for _ in range(4):
        pts = rng.uniform([0, 0], [h - 1, w - 1], size=(3, 2))
        t = np.linspace(0, 1, 400)[:, None]
        path = ((1 - t) ** 2 * pts[0] + 2 * (1 - t) * t * pts[1] + t ** 2 * pts[2])
        rr = np.clip(np.rint(path[:, 0]).astype(int), 0, h - 1)
        cc = np.clip(np.rint(path[:, 1]).astype(int), 0, w - 1)
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                mask[np.clip(rr + dr, 0, h - 1), np.clip(cc + dc, 0, w - 1)] = True
    return mask


def bench(fn, args, repeat):
    fn(*args)  # warm-up (first numba call compiles)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    gray = rng.integers(0, 256, size=(300, 400)).astype(np.uint8)
    mask = signature_like(rng, 192, 256)
    padded = np.pad(~mask, 1, constant_values=True)
    grayf = np.where(mask, 0.0, 255.0)

    cases = [
        ("median3 300x400", "median3", (gray,)),
        ("dilate DISK1 192x256", "dilate", (mask, DISK1)),
        ("erode DISK1 192x256", "erode", (mask, DISK1)),
        ("hit_or_miss 192x256", "hit_or_miss", (mask, _GOLAY_FG[0], _GOLAY_BG[0])),
        ("thin_stable (thicken) 192x256", "thin_stable",
         (padded, _GOLAY_FG, _GOLAY_BG)),
        ("components8 192x256", "count_components8", (mask,)),
        ("isolated 192x256", "count_isolated", (mask,)),
        ("resample 300x400 -> 192x256", "resample_catmull_rom",
         (np.pad(grayf, 60, constant_values=255.0), 192, 256)),
    ]

    print(f"{'kernel':34} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for label, name, call_args in cases:
        # thin_stable mutates its input; give each backend a fresh copy
        np_args = tuple(a.copy() if isinstance(a, np.ndarray) else a for a in call_args)
        t_np, out_np = bench(getattr(np_impl, name), np_args, args.repeat)
        if nb_impl is None:
            print(f"{label:34} {t_np * 1e3:9.2f}ms {'-':>10} {'-':>8}")
            continue
        nb_args = tuple(a.copy() if isinstance(a, np.ndarray) else a for a in call_args)
        t_nb, out_nb = bench(getattr(nb_impl, name), nb_args, args.repeat)
        agree = (np.array_equal(out_np, out_nb)
                 if isinstance(out_np, np.ndarray) else out_np == out_nb)
        flag = "" if agree else "  MISMATCH!"
        print(f"{label:34} {t_np * 1e3:9.2f}ms {t_nb * 1e3:9.2f}ms "
              f"{t_np / t_nb:7.1f}x{flag}")
    if nb_impl is None:
        print("\nnumba not importable; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
