"""Vectorized numpy implementations of the hot pixel loops.

This is the fallback backend; `sigver._kernels_numba` provides loop-level
twins compiled with numba. Both backends must agree bit for bit: boolean and
integer outputs are exact by nature, and the bicubic resampler accumulates
its 16 tap products in the same fixed order so the float64 results match.
"""

import numpy as np


def _shift(mask, dr, dc, fill=False):
    """Translate a 2-D array by (dr, dc), filling vacated cells with `fill`."""
    h, w = mask.shape
    out = np.full((h, w), fill, dtype=mask.dtype)
    rs_src = slice(max(0, -dr), min(h, h - dr))
    cs_src = slice(max(0, -dc), min(w, w - dc))
    rs_dst = slice(max(0, dr), min(h, h + dr))
    cs_dst = slice(max(0, dc), min(w, w + dc))
    if rs_src.start < rs_src.stop and cs_src.start < cs_src.stop:
        out[rs_dst, cs_dst] = mask[rs_src, cs_src]
    return out


def _se_offsets(se):
    """Offsets of true cells relative to the center origin, row-major."""
    oi, oj = se.shape[0] // 2, se.shape[1] // 2
    rows, cols = np.nonzero(se)
    return [(int(r) - oi, int(c) - oj) for r, c in zip(rows, cols)]


def median3(img):
    """3x3 median with replicate padding at the borders."""
    padded = np.pad(img, 1, mode="edge")
    h, w = img.shape
    stack = np.empty((9, h, w), dtype=img.dtype)
    k = 0
    for di in range(3):
        for dj in range(3):
            stack[k] = padded[di:di + h, dj:dj + w]
            k += 1
    # median of 9 = 5th order statistic; partition keeps integer dtypes exact
    return np.partition(stack, 4, axis=0)[4]


def dilate(mask, se):
    """Binary dilation: union of the structuring element stamped on each ink
    pixel (origin at the center). Out of bounds is background."""
    out = np.zeros_like(mask)
    for dr, dc in _se_offsets(se):
        out |= _shift(mask, dr, dc, fill=False)
    return out


def erode(mask, se):
    """Binary erosion; pixels where the element extends out of bounds fail."""
    out = np.ones_like(mask)
    for dr, dc in _se_offsets(se):
        out &= _shift(mask, -dr, -dc, fill=False)
    return out


def hit_or_miss(mask, se_fg, se_bg):
    """Pixels where se_fg fits the foreground and se_bg fits the background.

    Out-of-bounds pixels count as background: they fail foreground probes and
    satisfy background probes.
    """
    out = np.ones_like(mask)
    for dr, dc in _se_offsets(se_fg):
        out &= _shift(mask, -dr, -dc, fill=False)
    inv = ~mask
    for dr, dc in _se_offsets(se_bg):
        out &= _shift(inv, -dr, -dc, fill=True)
    return out


def thin_stable(cur, fgs, bgs):
    """Sequentially apply the template stack until a full pass changes
    nothing. `cur` carries a one-pixel boundary ring that is probed but never
    modified; thinning happens in place on the interior."""
    inner = (slice(1, -1), slice(1, -1))
    while True:
        changed = False
        for t in range(fgs.shape[0]):
            hits = hit_or_miss(cur, fgs[t], bgs[t])[inner]
            if hits.any():
                cur[inner] &= ~hits
                changed = True
        if not changed:
            return cur


def count_isolated(mask):
    """Ink pixels whose 8 neighbors (outside counts as background) are all
    background."""
    nbr = np.zeros_like(mask)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            nbr |= _shift(mask, dr, dc, fill=False)
    return int(np.count_nonzero(mask & ~nbr))


def count_components8(mask):
    """Number of 8-connected ink components, by queue flood fill."""
    h, w = mask.shape
    labeled = np.zeros((h, w), dtype=bool)
    count = 0
    rows, cols = np.nonzero(mask)
    for r0, c0 in zip(rows, cols):
        if labeled[r0, c0]:
            continue
        count += 1
        stack = [(int(r0), int(c0))]
        labeled[r0, c0] = True
        while stack:
            r, c = stack.pop()
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < h and 0 <= cc < w and mask[rr, cc] and not labeled[rr, cc]:
                        labeled[rr, cc] = True
                        stack.append((rr, cc))
    return count


def catmull_rom_taps(n_out, n_in):
    """Per output coordinate: the four clamped source indices and their
    Catmull-Rom (a = -0.5) weights, for center-aligned sampling.

    Returns (idx, wts) of shapes (n_out, 4) int64 / float64. Weights sum to 1.
    """
    scale = n_in / n_out
    x = (np.arange(n_out, dtype=np.float64) + 0.5) * scale - 0.5
    i0 = np.floor(x).astype(np.int64)
    t = x - i0
    t2 = t * t
    t3 = t2 * t
    wts = np.empty((n_out, 4), dtype=np.float64)
    wts[:, 0] = -0.5 * t3 + t2 - 0.5 * t
    wts[:, 1] = 1.5 * t3 - 2.5 * t2 + 1.0
    wts[:, 2] = -1.5 * t3 + 2.0 * t2 + 0.5 * t
    wts[:, 3] = 0.5 * t3 - 0.5 * t2
    idx = np.empty((n_out, 4), dtype=np.int64)
    for k in range(4):
        idx[:, k] = np.clip(i0 + (k - 1), 0, n_in - 1)
    return idx, wts


def resample_catmull_rom(gray, out_h, out_w):
    """Bicubic resample of a float64 grid with edge-clamped sampling."""
    in_h, in_w = gray.shape
    ridx, rwts = catmull_rom_taps(out_h, in_h)
    cidx, cwts = catmull_rom_taps(out_w, in_w)
    out = np.zeros((out_h, out_w), dtype=np.float64)
    # fixed (i, j) accumulation order; keep in sync with the numba backend
    for i in range(4):
        for j in range(4):
            w = rwts[:, i][:, None] * cwts[:, j][None, :]
            out += w * gray[ridx[:, i][:, None], cidx[:, j][None, :]]
    return out
