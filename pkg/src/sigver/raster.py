"""Image value conventions and lossless portable-graymap I/O.

Images are plain numpy arrays, row major:

  gray image    2-D uint8, shape (height, width), 0 = black .. 255 = white
  binary image  2-D bool, True = ink (foreground), False = background

Readers accept binary "P5" and ASCII "P2" graymaps with maxval <= 255;
the writer always emits canonical P5 (``P5\\n<w> <h>\\n255\\n`` + raw rows),
so load(save(img)) is bit-exact for every valid image.
"""

import numpy as np

from .errors import MalformedHeader, TruncatedData, UnsupportedFormat

_WS = frozenset(b" \t\r\n\v\f")


def _header_tokens(data, count):
    """Pull `count` whitespace-separated header tokens, honoring '#' comments.

    Tokens stop at whitespace, '#', or any control byte, so a raster section
    glued directly to the maxval still parses. Returns (tokens, offset of the
    first raster byte); at most one whitespace separator is consumed after
    the last token.
    """
    tokens = []
    i = 0
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i] in _WS:
            i += 1
        if i < n and data[i] == 0x23:  # '#'
            while i < n and data[i] not in (0x0A, 0x0D):
                i += 1
            continue
        start = i
        while i < n and data[i] > 0x20 and data[i] != 0x23:
            i += 1
        if i == start:
            raise MalformedHeader("unexpected end of header")
        tokens.append(data[start:i])
    if i < n and data[i] in _WS:
        i += 1
    return tokens, i


def _parse_dims(tokens):
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise MalformedHeader(f"non-numeric header fields: {tokens!r}") from None
    if width <= 0 or height <= 0:
        raise MalformedHeader(f"bad dimensions {width}x{height}")
    if maxval <= 0 or maxval > 255:
        raise UnsupportedFormat(f"maxval {maxval} outside 1..255")
    return width, height, maxval


def load_gray(data: bytes) -> np.ndarray:
    """Decode P5 (binary) or P2 (ASCII) graymap bytes into a gray image.

    Raises UnsupportedFormat for other magics (including color P3/P6),
    MalformedHeader for unparseable headers and TruncatedData when pixel
    data is short.
    """
    if len(data) < 2:
        raise TruncatedData("file shorter than a magic number")
    magic = bytes(data[:2])
    if magic not in (b"P5", b"P2"):
        raise UnsupportedFormat(f"unsupported magic {magic!r}")
    tokens, offset = _header_tokens(data[2:], 3)
    width, height, maxval = _parse_dims(tokens)
    n = width * height
    if magic == b"P5":
        pixels = data[2 + offset:2 + offset + n]
        if len(pixels) < n:
            raise TruncatedData(f"expected {n} pixel bytes, found {len(pixels)}")
        img = np.frombuffer(pixels, dtype=np.uint8, count=n).copy()
    else:
        fields = data[2 + offset:].split()
        if len(fields) < n:
            raise TruncatedData(f"expected {n} ASCII pixels, found {len(fields)}")
        try:
            img = np.array([int(f) for f in fields[:n]], dtype=np.int64)
        except ValueError:
            raise TruncatedData("non-numeric pixel data") from None
        if img.min() < 0 or img.max() > 255:
            raise TruncatedData("pixel value outside 0..255")
        img = img.astype(np.uint8)
    if maxval < 255 and int(img.max()) > maxval:
        raise TruncatedData(f"pixel value above declared maxval {maxval}")
    return img.reshape(height, width)


def save_gray(img: np.ndarray) -> bytes:
    """Encode a gray image as canonical binary P5 with maxval 255."""
    img = ensure_gray(img)
    height, width = img.shape
    return b"P5\n%d %d\n255\n" % (width, height) + np.ascontiguousarray(img).tobytes()


def binary_to_gray(mask: np.ndarray) -> np.ndarray:
    """Ink becomes 0 (dark) and background 255, matching scanned signatures."""
    mask = ensure_binary(mask)
    return np.where(mask, 0, 255).astype(np.uint8)


def ensure_gray(img) -> np.ndarray:
    if not isinstance(img, np.ndarray) or img.ndim != 2 or img.dtype != np.uint8:
        raise UnsupportedFormat("expected a 2-D uint8 gray image")
    return img


def ensure_binary(mask) -> np.ndarray:
    if not isinstance(mask, np.ndarray) or mask.ndim != 2 or mask.dtype != np.bool_:
        raise UnsupportedFormat("expected a 2-D bool binary image")
    return mask
