"""Pixel-level operations of the weevil detection pipeline.

Frame conventions (numpy arrays throughout):

* color frame: ``(h, w, 3)`` uint8, RGB order
* grayscale frame: ``(h, w)`` uint8
* binary frame: ``(h, w)`` uint8 restricted to ``{0, 255}``

Binarization maps dark pixels (gray value <= T) to 255, so weevils, which
are darker than the trap background, become the 255-valued foreground.
Every function here is pure and safe to call concurrently.

8-bit images are read and written as PGM (P5) and PNG; PGM is the
canonical fixture format because a frame can be written by hand.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import kernels
from .errors import ConfigError, DimensionMismatchError, ImageFormatError

__all__ = [
    "Component",
    "to_grayscale",
    "binary_threshold",
    "absolute_difference",
    "similarity_percent",
    "label_components",
    "count_weevils",
    "encode_pgm",
    "decode_pgm",
    "encode_png",
    "decode_image",
    "read_image",
    "write_image",
]


@dataclass(frozen=True)
class Component:
    """One 8-connected foreground region of a binary frame.

    ``bbox`` is ``(min_x, min_y, max_x, max_y)`` in pixel coordinates,
    inclusive on all sides; ``centroid`` is the mean pixel position
    ``(x, y)`` and always lies inside the bbox. ``area`` is the filled
    pixel count of the region, not a boundary length.
    """

    label: int
    area: int
    bbox: tuple[int, int, int, int]
    centroid: tuple[float, float]


def _require_gray(img: np.ndarray, name: str = "image") -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise ImageFormatError(
            f"{name}: expected a (h, w) uint8 grayscale frame, "
            f"got shape {img.shape} dtype {img.dtype}"
        )
    return np.ascontiguousarray(img)


def _require_binary(img: np.ndarray, name: str = "image") -> np.ndarray:
    img = _require_gray(img, name)
    if not np.isin(img, (0, 255)).all():
        raise ImageFormatError(f"{name}: binary frame pixels must be 0 or 255")
    return img


def _require_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(
            f"frame dimensions differ: {a.shape[1]}x{a.shape[0]} vs "
            f"{b.shape[1]}x{b.shape[0]}"
        )


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Convert an RGB frame to grayscale (0.299 R + 0.587 G + 0.114 B).

    Rounding is half-up via integer arithmetic, so equal channels
    ``(v, v, v)`` map exactly to ``v``. A 2-d uint8 input is returned
    unchanged (already grayscale).
    """
    img = np.asarray(img)
    if img.ndim == 2 and img.dtype == np.uint8:
        return np.ascontiguousarray(img)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ImageFormatError(
            f"expected a (h, w, 3) uint8 RGB frame, got shape {img.shape} "
            f"dtype {img.dtype}"
        )
    c = img.astype(np.uint32)
    gray = (299 * c[:, :, 0] + 587 * c[:, :, 1] + 114 * c[:, :, 2] + 500) // 1000
    return np.ascontiguousarray(np.minimum(gray, 255).astype(np.uint8))


def binary_threshold(img: np.ndarray, t: int) -> np.ndarray:
    """Binarize a grayscale frame: pixels > ``t`` become 0, pixels <= ``t``
    become 255. Equality lands in the foreground (255) branch."""
    img = _require_gray(img)
    if not 0 <= int(t) <= 255:
        raise ConfigError(f"gray threshold must be in [0, 255], got {t}")
    return kernels.threshold_u8(img, int(t))


def absolute_difference(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-pixel |a - b| of two grayscale frames of identical dimensions."""
    a = _require_gray(a, "first frame")
    b = _require_gray(b, "second frame")
    _require_same_shape(a, b)
    return kernels.absdiff_u8(a, b)


def similarity_percent(a: np.ndarray, b: np.ndarray) -> float:
    """Percentage of pixel positions where two binary frames agree.

    100.0 for identical frames; flipping k pixels of a copy lowers the
    result by exactly 100 k / (w h).
    """
    a = _require_binary(a, "first frame")
    b = _require_binary(b, "second frame")
    _require_same_shape(a, b)
    return 100.0 * kernels.equal_count(a, b) / a.size


def label_components(img: np.ndarray) -> list[Component]:
    """8-connected components of the 255-valued foreground of a binary
    frame.

    Components are ordered by their bbox (min_y, then min_x) and labeled
    densely from 1 in that order, so downstream logs are reproducible
    regardless of the kernel backend.
    """
    img = _require_binary(img)
    n, areas, min_x, min_y, max_x, max_y, sum_x, sum_y = kernels.label_stats(img)
    if n == 0:
        return []
    order = sorted(
        range(n),
        key=lambda k: (min_y[k], min_x[k], max_y[k], max_x[k], areas[k]),
    )
    out = []
    for label, k in enumerate(order, start=1):
        area = int(areas[k])
        out.append(
            Component(
                label=label,
                area=area,
                bbox=(int(min_x[k]), int(min_y[k]), int(max_x[k]), int(max_y[k])),
                centroid=(sum_x[k] / area, sum_y[k] / area),
            )
        )
    return out


def count_weevils(components, lower: int, upper: int) -> int:
    """Number of components whose area lies in [lower, upper], both bounds
    inclusive."""
    if lower > upper:
        raise ConfigError(f"area bounds inverted: lower {lower} > upper {upper}")
    return sum(1 for c in components if lower <= c.area <= upper)


# ---------------------------------------------------------------------------
# Image file formats


def encode_pgm(img: np.ndarray) -> bytes:
    """Serialize a grayscale frame as binary PGM (P5, maxval 255)."""
    img = _require_gray(img)
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + img.tobytes()


def decode_pgm(data: bytes) -> np.ndarray:
    """Parse a binary PGM (P5) into a grayscale frame."""
    if not data.startswith(b"P5"):
        raise ImageFormatError("not a P5 PGM")
    # Header: magic, width, height, maxval as whitespace-separated tokens,
    # with '#' comments allowed between them.
    pos = 2
    fields = []
    while len(fields) < 3:
        m = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\d+)").match(data, pos)
        if m is None:
            raise ImageFormatError("truncated PGM header")
        fields.append(int(m.group(1)))
        pos = m.end()
    w, h, maxval = fields
    if maxval != 255:
        raise ImageFormatError(f"unsupported PGM maxval {maxval}")
    pos += 1  # single whitespace byte after maxval
    pixels = data[pos : pos + w * h]
    if len(pixels) != w * h:
        raise ImageFormatError("PGM pixel data truncated")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(h, w).copy()


def encode_png(img: np.ndarray) -> bytes:
    """Serialize a grayscale or RGB frame as PNG."""
    img = np.asarray(img)
    if img.dtype != np.uint8 or img.ndim not in (2, 3):
        raise ImageFormatError("PNG encoding expects a uint8 frame")
    buf = io.BytesIO()
    Image.fromarray(img).save(buf, format="PNG")
    return buf.getvalue()


def decode_image(data: bytes) -> np.ndarray:
    """Decode PGM or PNG bytes into a frame (grayscale or RGB)."""
    if data[:2] == b"P5":
        return decode_pgm(data)
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        try:
            with Image.open(io.BytesIO(data)) as im:
                if im.mode not in ("L", "RGB"):
                    im = im.convert("RGB")
                return np.asarray(im, dtype=np.uint8).copy()
        except Exception as exc:
            raise ImageFormatError(f"broken PNG: {exc}") from exc
    raise ImageFormatError("unsupported image format (expected P5 PGM or PNG)")


def read_image(path) -> np.ndarray:
    """Load a PGM or PNG file as a frame."""
    data = Path(path).read_bytes()
    try:
        return decode_image(data)
    except ImageFormatError as exc:
        raise ImageFormatError(f"{path}: {exc}") from exc


def write_image(path, img: np.ndarray) -> None:
    """Write a frame as PGM or PNG depending on the file suffix."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        path.write_bytes(encode_pgm(img))
    elif path.suffix.lower() == ".png":
        path.write_bytes(encode_png(img))
    else:
        raise ImageFormatError(f"unsupported image suffix: {path.suffix!r}")
