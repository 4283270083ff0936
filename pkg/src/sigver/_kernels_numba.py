"""Numba-compiled twins of the kernels in `sigver._kernels_numpy`.

Importing this module requires numba; the facade in `sigver.kernels` falls
back to the numpy backend when it is missing or disabled. Keep semantics
(and, for the resampler, accumulation order) identical to the numpy twins.
"""

import numpy as np
from numba import njit

from ._kernels_numpy import catmull_rom_taps


@njit(cache=True)
def median3(img):
    h, w = img.shape
    out = np.empty_like(img)
    win = np.empty(9, dtype=img.dtype)
    for r in range(h):
        for c in range(w):
            k = 0
            for di in range(-1, 2):
                rr = r + di
                if rr < 0:
                    rr = 0
                elif rr >= h:
                    rr = h - 1
                for dj in range(-1, 2):
                    cc = c + dj
                    if cc < 0:
                        cc = 0
                    elif cc >= w:
                        cc = w - 1
                    win[k] = img[rr, cc]
                    k += 1
            for a in range(1, 9):
                v = win[a]
                b = a - 1
                while b >= 0 and win[b] > v:
                    win[b + 1] = win[b]
                    b -= 1
                win[b + 1] = v
            out[r, c] = win[4]
    return out


@njit(cache=True)
def dilate(mask, se):
    h, w = mask.shape
    sh, sw = se.shape
    oi, oj = sh // 2, sw // 2
    out = np.zeros_like(mask)
    for r in range(h):
        for c in range(w):
            if not mask[r, c]:
                continue
            for i in range(sh):
                for j in range(sw):
                    if se[i, j]:
                        rr = r + i - oi
                        cc = c + j - oj
                        if 0 <= rr < h and 0 <= cc < w:
                            out[rr, cc] = True
    return out


@njit(cache=True)
def erode(mask, se):
    h, w = mask.shape
    sh, sw = se.shape
    oi, oj = sh // 2, sw // 2
    out = np.zeros_like(mask)
    for r in range(h):
        for c in range(w):
            ok = True
            for i in range(sh):
                for j in range(sw):
                    if se[i, j]:
                        rr = r + i - oi
                        cc = c + j - oj
                        if rr < 0 or rr >= h or cc < 0 or cc >= w or not mask[rr, cc]:
                            ok = False
                            break
                if not ok:
                    break
            out[r, c] = ok
    return out


@njit(cache=True)
def hit_or_miss(mask, se_fg, se_bg):
    h, w = mask.shape
    sh, sw = se_fg.shape
    oi, oj = sh // 2, sw // 2
    out = np.zeros_like(mask)
    for r in range(h):
        for c in range(w):
            ok = True
            for i in range(sh):
                for j in range(sw):
                    if se_fg[i, j]:
                        rr = r + i - oi
                        cc = c + j - oj
                        if rr < 0 or rr >= h or cc < 0 or cc >= w or not mask[rr, cc]:
                            ok = False
                            break
                if not ok:
                    break
            if ok:
                bh, bw = se_bg.shape
                bi, bj = bh // 2, bw // 2
                for i in range(bh):
                    for j in range(bw):
                        if se_bg[i, j]:
                            rr = r + i - bi
                            cc = c + j - bj
                            if 0 <= rr < h and 0 <= cc < w and mask[rr, cc]:
                                ok = False
                                break
                    if not ok:
                        break
            out[r, c] = ok
    return out


@njit(cache=True)
def thin_stable(cur, fgs, bgs):
    """Exact-equivalent fast path for the numpy backend's thin_stable.

    Per template, a pixel is re-examined only when its 3x3 neighborhood has
    changed since that template last evaluated it; an unchanged neighborhood
    reproduces the previous (non-)match, so skipping it cannot alter the
    result. Hits within one template application are collected against the
    pre-application state, exactly like the snapshot semantics of the
    vectorized pass. The one-pixel boundary ring is probed, never written.
    """
    h, w = cur.shape
    n_t = fgs.shape[0]
    dirty = np.ones((n_t, h, w), dtype=np.bool_)
    hit_r = np.empty(h * w, dtype=np.int64)
    hit_c = np.empty(h * w, dtype=np.int64)
    while True:
        changed = False
        for t in range(n_t):
            n_hits = 0
            for r in range(1, h - 1):
                for c in range(1, w - 1):
                    if not dirty[t, r, c]:
                        continue
                    dirty[t, r, c] = False
                    if not cur[r, c]:
                        continue
                    ok = True
                    for i in range(3):
                        for j in range(3):
                            v = cur[r + i - 1, c + j - 1]
                            if (fgs[t, i, j] and not v) or (bgs[t, i, j] and v):
                                ok = False
                                break
                        if not ok:
                            break
                    if ok:
                        hit_r[n_hits] = r
                        hit_c[n_hits] = c
                        n_hits += 1
            if n_hits:
                changed = True
                for k in range(n_hits):
                    r, c = hit_r[k], hit_c[k]
                    cur[r, c] = False
                    for i in range(-1, 2):
                        for j in range(-1, 2):
                            for tt in range(n_t):
                                dirty[tt, r + i, c + j] = True
        if not changed:
            return cur


@njit(cache=True)
def count_isolated(mask):
    h, w = mask.shape
    n = 0
    for r in range(h):
        for c in range(w):
            if not mask[r, c]:
                continue
            alone = True
            for dr in range(-1, 2):
                for dc in range(-1, 2):
                    if dr == 0 and dc == 0:
                        continue
                    rr = r + dr
                    cc = c + dc
                    if 0 <= rr < h and 0 <= cc < w and mask[rr, cc]:
                        alone = False
                        break
                if not alone:
                    break
            if alone:
                n += 1
    return n


@njit(cache=True)
def count_components8(mask):
    h, w = mask.shape
    labeled = np.zeros((h, w), dtype=np.bool_)
    stack = np.empty(h * w, dtype=np.int64)
    count = 0
    for r0 in range(h):
        for c0 in range(w):
            if not mask[r0, c0] or labeled[r0, c0]:
                continue
            count += 1
            top = 0
            stack[top] = r0 * w + c0
            top += 1
            labeled[r0, c0] = True
            while top > 0:
                top -= 1
                idx = stack[top]
                r = idx // w
                c = idx % w
                for dr in range(-1, 2):
                    for dc in range(-1, 2):
                        rr = r + dr
                        cc = c + dc
                        if 0 <= rr < h and 0 <= cc < w and mask[rr, cc] and not labeled[rr, cc]:
                            labeled[rr, cc] = True
                            stack[top] = rr * w + cc
                            top += 1
    return count


@njit(cache=True)
def _resample(gray, ridx, rwts, cidx, cwts, out_h, out_w):
    out = np.zeros((out_h, out_w), dtype=np.float64)
    for r in range(out_h):
        for c in range(out_w):
            acc = 0.0
            # same (i, j) order and product grouping as the numpy backend
            for i in range(4):
                for j in range(4):
                    acc += (rwts[r, i] * cwts[c, j]) * gray[ridx[r, i], cidx[c, j]]
            out[r, c] = acc
    return out


def resample_catmull_rom(gray, out_h, out_w):
    in_h, in_w = gray.shape
    ridx, rwts = catmull_rom_taps(out_h, in_h)
    cidx, cwts = catmull_rom_taps(out_w, in_w)
    return _resample(gray, ridx, rwts, cidx, cwts, out_h, out_w)
