"""Signature image conditioning.

Scanned images go through median denoise, Otsu binarization, content crop,
bicubic resize to the 192x256 canonical frame and morphological thickening.
Rendered pen traces (already near-binary) skip the denoise/Otsu steps and get
a fixed mid-gray threshold plus one dilation instead.
"""

import enum

import numpy as np

from . import kernels
from .errors import DegenerateHistogram, EmptySignature, UnsupportedFormat
from .raster import binary_to_gray, ensure_binary, ensure_gray

CANONICAL_HEIGHT = 192
CANONICAL_WIDTH = 256

# 3x3 cross: the discrete disk of radius 1 (4-neighborhood plus center)
DISK1 = np.array(
    [[False, True, False],
     [True, True, True],
     [False, True, False]]
)


def _rotations(fg, bg):
    return [(np.rot90(fg, k).copy(), np.rot90(bg, k).copy()) for k in range(4)]


def _golay_l():
    """The eight 3x3 thinning template pairs (foreground, background): two
    base orientations and their quarter-turn rotations, applied in this
    fixed order within every thinning pass."""
    b = np.array
    edge_fg = b([[0, 0, 0], [0, 1, 0], [1, 1, 1]], dtype=bool)
    edge_bg = b([[1, 1, 1], [0, 0, 0], [0, 0, 0]], dtype=bool)
    corner_fg = b([[0, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=bool)
    corner_bg = b([[0, 1, 1], [0, 0, 1], [0, 0, 0]], dtype=bool)
    templates = []
    for (f1, g1), (f2, g2) in zip(_rotations(edge_fg, edge_bg),
                                  _rotations(corner_fg, corner_bg)):
        templates.append((f1, g1))
        templates.append((f2, g2))
    return templates


GOLAY_L = _golay_l()
_GOLAY_FG = np.ascontiguousarray(np.stack([fg for fg, _ in GOLAY_L]))
_GOLAY_BG = np.ascontiguousarray(np.stack([bg for _, bg in GOLAY_L]))


class PreprocessMode(enum.Enum):
    OFFLINE = "offline"
    ONLINE_TRACE = "online"


def _check_se(se):
    se = ensure_binary(se)
    if se.shape[0] % 2 == 0 or se.shape[1] % 2 == 0:
        raise UnsupportedFormat("structuring element sides must be odd")
    return se


def median_filter3(img: np.ndarray) -> np.ndarray:
    """3x3 median filter with replicate padding; kills salt/pepper pixels."""
    return kernels.median3(ensure_gray(img))


def otsu_threshold(img: np.ndarray) -> int:
    """Threshold maximizing between-class variance of the split
    {pixel < t} / {pixel >= t}, t in 0..255; ties resolved to the smallest t.

    The argmax is computed in exact integer arithmetic: the between-class
    variance at t is proportional to (s_lo*n_hi - s_hi*n_lo)^2 / (n_lo*n_hi),
    compared across candidates by cross multiplication.

    Raises DegenerateHistogram for constant images (no split separates
    anything; the pipeline treats such images as blank).
    """
    img = ensure_gray(img)
    if img.size == 0:
        raise DegenerateHistogram("empty image")
    counts = np.bincount(img.ravel(), minlength=256)
    if int(np.count_nonzero(counts)) <= 1:
        raise DegenerateHistogram("constant image")
    n_cum = [0] * 257
    s_cum = [0] * 257
    for v in range(256):
        c = int(counts[v])
        n_cum[v + 1] = n_cum[v] + c
        s_cum[v + 1] = s_cum[v] + c * v
    n_total, s_total = n_cum[256], s_cum[256]
    best_t, best_num, best_den = 0, -1, 1
    for t in range(256):
        n_lo = n_cum[t]
        n_hi = n_total - n_lo
        if n_lo == 0 or n_hi == 0:
            continue
        s_lo = s_cum[t]
        num = (s_lo * n_hi - (s_total - s_lo) * n_lo) ** 2
        den = n_lo * n_hi
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def binarize(img: np.ndarray, t: int) -> np.ndarray:
    """Pixels strictly below the threshold become ink (dark ink on paper)."""
    img = ensure_gray(img)
    if not 0 <= t <= 255:
        raise UnsupportedFormat(f"threshold {t} outside 0..255")
    return img < t


def dilate(mask: np.ndarray, se: np.ndarray) -> np.ndarray:
    """Binary dilation by a centered structuring element."""
    return kernels.dilate(ensure_binary(mask), _check_se(se))


def erode(mask: np.ndarray, se: np.ndarray) -> np.ndarray:
    """Binary erosion; the element must fit entirely inside the foreground."""
    return kernels.erode(ensure_binary(mask), _check_se(se))


def hit_or_miss(mask: np.ndarray, se_fg: np.ndarray, se_bg: np.ndarray) -> np.ndarray:
    """Pixels where se_fg fits the ink and se_bg fits the background."""
    return kernels.hit_or_miss(ensure_binary(mask), _check_se(se_fg), _check_se(se_bg))


def _thin_to_stability(mask):
    """Thin `mask` (the complement of the signature) to a fixpoint.

    The one-pixel True ring models the unbounded paper background beyond the
    frame (foreground of the complement). It is a boundary condition only:
    passes probe it but never erase it, which keeps blank images blank and
    makes the thickening below an exact fixpoint.
    """
    cur = np.pad(mask, 1, mode="constant", constant_values=True)
    cur = kernels.thin_stable(cur, _GOLAY_FG, _GOLAY_BG)
    return cur[1:-1, 1:-1].copy()


def thicken_to_stability(mask: np.ndarray) -> np.ndarray:
    """Grow the ink until a full thinning pass of the background changes
    nothing. Realized as the complement of thinning the complement; the
    result is a fixpoint and never loses ink."""
    mask = ensure_binary(mask)
    return ~_thin_to_stability(~mask)


def crop_to_content(mask: np.ndarray) -> np.ndarray:
    """Tight bounding box of the ink. Raises EmptySignature when blank."""
    mask = ensure_binary(mask)
    rows = np.nonzero(mask.any(axis=1))[0]
    cols = np.nonzero(mask.any(axis=0))[0]
    if rows.size == 0:
        raise EmptySignature("no ink pixels to crop to")
    return mask[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1].copy()


def resize_to_canonical(mask: np.ndarray) -> np.ndarray:
    """Bicubic resample (Catmull-Rom, edge clamped) straight to 192x256.

    The binary image is resampled in the gray domain (ink = 0, paper = 255)
    and re-binarized at mid gray. The target grid is imposed even when the
    source aspect ratio differs, so the downstream block tiling is exact.
    """
    mask = ensure_binary(mask)
    if mask.size == 0:
        raise EmptySignature("cannot resize an empty image")
    gray = binary_to_gray(mask).astype(np.float64)
    resampled = kernels.resample_catmull_rom(gray, CANONICAL_HEIGHT, CANONICAL_WIDTH)
    return resampled < 128.0


def preprocess(img: np.ndarray, mode: PreprocessMode = PreprocessMode.OFFLINE) -> np.ndarray:
    """Full conditioning pipeline; always returns a 192x256 binary image.

    Offline scans: median -> Otsu binarize -> crop -> resize -> thicken.
    Online traces: fixed threshold 128 -> dilate(DISK1) -> crop -> resize
    -> thicken. Blank input raises EmptySignature.
    """
    img = ensure_gray(img)
    if mode is PreprocessMode.OFFLINE:
        smooth = median_filter3(img)
        try:
            t = otsu_threshold(smooth)
        except DegenerateHistogram:
            raise EmptySignature("constant image has no content") from None
        mask = binarize(smooth, t)
    elif mode is PreprocessMode.ONLINE_TRACE:
        mask = dilate(binarize(img, 128), DISK1)
    else:
        raise UnsupportedFormat(f"unknown preprocess mode {mode!r}")
    return thicken_to_stability(resize_to_canonical(crop_to_content(mask)))
