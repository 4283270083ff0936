"""Block-geometric feature extraction.

The canonical 192x256 binary image is tiled into a 4x4 grid of 48x64 blocks,
row major. Each block contributes eight numbers (zeroed for blocks with 20 or
fewer ink pixels), and two whole-image counts are appended, giving the final
130-value feature vector:

  [block 0 .. block 15] x (eff_x, eff_y, dist, active, components,
                           isolated, height, length), global_active,
                           global_components
"""

from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import EmptyRegion, EmptySignature, TooFewSamples, WrongDimensions
from .preprocess import CANONICAL_HEIGHT, CANONICAL_WIDTH
from .raster import ensure_binary

BLOCK_ROWS = 48
BLOCK_COLS = 64
GRID = 4
FEATURES_PER_BLOCK = 8
VECTOR_LENGTH = GRID * GRID * FEATURES_PER_BLOCK + 2
SPARSE_BLOCK_MAX_ACTIVE = 20


def split_blocks(mask: np.ndarray) -> list:
    """The 16 block views of a canonical image, row major."""
    mask = ensure_binary(mask)
    if mask.shape != (CANONICAL_HEIGHT, CANONICAL_WIDTH):
        raise WrongDimensions(
            f"expected {CANONICAL_HEIGHT}x{CANONICAL_WIDTH}, got {mask.shape[0]}x{mask.shape[1]}")
    return [
        mask[r * BLOCK_ROWS:(r + 1) * BLOCK_ROWS, c * BLOCK_COLS:(c + 1) * BLOCK_COLS]
        for r in range(GRID)
        for c in range(GRID)
    ]


def count_active(region: np.ndarray) -> int:
    return int(np.count_nonzero(ensure_binary(region)))


def connected_components(region: np.ndarray) -> int:
    """Number of 8-connected ink components."""
    return kernels.count_components8(np.ascontiguousarray(ensure_binary(region)))


def count_isolated(region: np.ndarray) -> int:
    """Ink pixels with all 8 neighbors background (outside counts as background)."""
    return kernels.count_isolated(np.ascontiguousarray(ensure_binary(region)))


def center_of_mass(region: np.ndarray) -> tuple:
    """Centroid of the ink: (mean row index, mean column index)."""
    region = ensure_binary(region)
    rows, cols = np.nonzero(region)
    if rows.size == 0:
        raise EmptyRegion("center of mass of a blank region")
    return float(rows.mean()), float(cols.mean())


def effective_center(region: np.ndarray) -> tuple:
    """Half of the peak row ink count and half of the peak column ink count.

    Not a coordinate in the usual sense, but a deterministic density feature
    of the block's busiest row and column.
    """
    region = ensure_binary(region)
    if not region.any():
        raise EmptyRegion("effective center of a blank region")
    row_counts = region.sum(axis=1)
    col_counts = region.sum(axis=0)
    return float(row_counts.max()) / 2.0, float(col_counts.max()) / 2.0


def center_distance(cm: tuple, ec: tuple) -> float:
    dx = cm[0] - ec[0]
    dy = cm[1] - ec[1]
    return float(np.hypot(dx, dy))


def height_length(region: np.ndarray) -> tuple:
    """(peak row ink count, peak column ink count); zeros when blank."""
    region = ensure_binary(region)
    if not region.any():
        return 0, 0
    return int(region.sum(axis=1).max()), int(region.sum(axis=0).max())


def block_features(block: np.ndarray) -> np.ndarray:
    """Eight features of one 48x64 block; all zeros when the block holds 20
    or fewer ink pixels."""
    block = ensure_binary(block)
    if block.shape != (BLOCK_ROWS, BLOCK_COLS):
        raise WrongDimensions(f"expected a {BLOCK_ROWS}x{BLOCK_COLS} block")
    active = count_active(block)
    if active <= SPARSE_BLOCK_MAX_ACTIVE:
        return np.zeros(FEATURES_PER_BLOCK, dtype=np.float64)
    ec = effective_center(block)
    cm = center_of_mass(block)
    height, length = height_length(block)
    return np.array(
        [
            ec[0],
            ec[1],
            center_distance(cm, ec),
            float(active),
            float(connected_components(block)),
            float(count_isolated(block)),
            float(height),
            float(length),
        ],
        dtype=np.float64,
    )


def extract(mask: np.ndarray) -> np.ndarray:
    """The 130-value feature vector of a canonical binary image."""
    mask = ensure_binary(mask)
    if mask.shape != (CANONICAL_HEIGHT, CANONICAL_WIDTH):
        raise WrongDimensions(
            f"expected {CANONICAL_HEIGHT}x{CANONICAL_WIDTH}, got {mask.shape[0]}x{mask.shape[1]}")
    if not mask.any():
        raise EmptySignature("no ink in canonical image")
    parts = [block_features(b) for b in split_blocks(mask)]
    parts.append(np.array(
        [float(count_active(mask)), float(connected_components(mask))], dtype=np.float64))
    vec = np.concatenate(parts)
    assert vec.shape == (VECTOR_LENGTH,)
    return vec


class Normalizer(NamedTuple):
    """Per-dimension z-score statistics fitted on training vectors."""
    mean: np.ndarray
    std: np.ndarray


STD_FLOOR = 1e-12


def fit_normalizer(vectors) -> Normalizer:
    """Per-dimension mean and population standard deviation over >= 2 vectors."""
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 2:
        raise TooFewSamples("normalizer needs at least 2 vectors")
    return Normalizer(arr.mean(axis=0), arr.std(axis=0))


def apply_normalizer(stats: Normalizer, v: np.ndarray) -> np.ndarray:
    """Z-score a vector (or a matrix of row vectors); dimensions with nearly
    zero spread map to 0."""
    v = np.asarray(v, dtype=np.float64)
    centered = v - stats.mean
    safe = np.where(stats.std < STD_FLOOR, 1.0, stats.std)
    out = centered / safe
    return np.where(stats.std < STD_FLOOR, 0.0, out)
