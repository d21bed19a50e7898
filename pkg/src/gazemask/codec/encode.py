"""Scanpath -> 3-channel image encoding.

Channel layout of an encoded image (``H x W x 3`` float32 in ``[0, 1]``):

- R: 1.0 on every gaze pixel (dots)
- G: time of the gaze pixel, ``(t / duration) * (1 - g_floor) + g_floor``
- B: 1.0 on the rasterized segment between consecutive gaze pixels

A point ``(x, y)`` lands on row ``round(y * (res - 1))`` and column
``round(x * (res - 1))`` with halves rounded up.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from gazemask.codec.scanpath import InvalidScanpath, Scanpath

RED, GREEN, BLUE = 0, 1, 2


@dataclass(frozen=True)
class EncodingParams:
    """Rendering decisions the source encoding leaves open."""

    resolution: int = 64
    g_floor: float = 0.1
    dot_radius: int = 1

    def __post_init__(self) -> None:
        if self.resolution < 8:
            raise ValueError(f"resolution must be >= 8, got {self.resolution}")
        if not 0.0 <= self.g_floor < 1.0:
            raise ValueError(f"g_floor must be in [0, 1), got {self.g_floor}")
        if self.dot_radius < 1:
            raise ValueError(f"dot_radius must be >= 1, got {self.dot_radius}")


def _round_half_up(values: np.ndarray) -> np.ndarray:
    return np.floor(values + 0.5).astype(np.int64)


def pixel_coords(path: Scanpath, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(rows, cols)`` of every gaze point."""
    scale = resolution - 1
    return _round_half_up(path.y * scale), _round_half_up(path.x * scale)


def rasterize_line(
    start: tuple[int, int], end: tuple[int, int]
) -> tuple[np.ndarray, np.ndarray]:
    """
    Rasterize the segment between two pixel centers.

    Steps one pixel at a time along the major axis; the minor coordinate is
    the exact line position rounded to the nearest pixel, halves rounded away
    from ``start``. Both endpoints are included.

    Returns:
        ``(rows, cols)`` integer arrays, ordered from ``start`` to ``end``.
    """
    r0, c0 = start
    r1, c1 = end
    dr, dc = r1 - r0, c1 - c0
    n = max(abs(dr), abs(dc))
    if n == 0:
        return np.array([r0]), np.array([c0])
    i = np.arange(n + 1, dtype=np.int64)
    rows = r0 + np.sign(dr) * ((2 * i * abs(dr) + n) // (2 * n))
    cols = c0 + np.sign(dc) * ((2 * i * abs(dc) + n) // (2 * n))
    return rows, cols


def _dot_offsets(radius: int) -> tuple[np.ndarray, np.ndarray]:
    span = np.arange(-radius + 1, radius)
    dr, dc = np.meshgrid(span, span, indexing="ij")
    keep = dr**2 + dc**2 < radius**2
    return dr[keep], dc[keep]


def encode_scanpath(
    path: Scanpath,
    resolution: int = 64,
    params: EncodingParams | None = None,
) -> np.ndarray:
    """
    Encode a scanpath as a ``resolution x resolution x 3`` image.

    Args:
        path: Validated scanpath (at least one point, sorted timestamps).
        resolution: Output edge length in pixels; overridden by ``params``.
        params: Full rendering parameters.

    Returns:
        float32 array of shape ``(resolution, resolution, 3)``.

    Raises:
        InvalidScanpath: If ``path`` is not a :class:`Scanpath`.
    """
    if params is None:
        params = EncodingParams(resolution=resolution)
    if not isinstance(path, Scanpath):
        raise InvalidScanpath(f"expected Scanpath, got {type(path).__name__}")
    res = params.resolution
    image = np.zeros((res, res, 3), dtype=np.float32)
    rows, cols = pixel_coords(path, res)

    duration = path.duration
    ramp = path.t / duration if duration > 0 else np.zeros(len(path))
    green = (ramp * (1.0 - params.g_floor) + params.g_floor).astype(np.float32)

    for a in range(len(path) - 1):
        if rows[a] == rows[a + 1] and cols[a] == cols[a + 1]:
            continue
        lr, lc = rasterize_line((rows[a], cols[a]), (rows[a + 1], cols[a + 1]))
        image[lr, lc, BLUE] = 1.0

    off_r, off_c = _dot_offsets(params.dot_radius)
    dot_r = (rows[:, None] + off_r[None, :]).ravel()
    dot_c = (cols[:, None] + off_c[None, :]).ravel()
    dot_g = np.repeat(green, off_r.size)
    inside = (dot_r >= 0) & (dot_r < res) & (dot_c >= 0) & (dot_c < res)
    dot_r, dot_c, dot_g = dot_r[inside], dot_c[inside], dot_g[inside]
    image[dot_r, dot_c, RED] = 1.0
    np.maximum.at(image[:, :, GREEN], (dot_r, dot_c), dot_g)
    return image


def to_png(image: np.ndarray, path: str | Path) -> Path:
    """Write an encoded image as an 8-bit RGB PNG."""
    data = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    pixels = np.floor(data * 255.0 + 0.5).astype(np.uint8)
    out = Path(path)
    Image.fromarray(pixels).save(out)
    return out
