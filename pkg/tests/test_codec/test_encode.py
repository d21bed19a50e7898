"""Tests for gazemask.codec.encode."""

import math
from fractions import Fraction

import numpy as np
import pytest
from PIL import Image

from gazemask.codec import (
    EncodingParams,
    InvalidScanpath,
    Scanpath,
    encode_scanpath,
    pixel_coords,
    rasterize_line,
    to_png,
)
from gazemask.codec.encode import BLUE, GREEN, RED


def test_diagonal_encoding(diagonal_path):
    image = encode_scanpath(diagonal_path)
    assert image.shape == (64, 64, 3)
    assert image.dtype == np.float32

    red = np.argwhere(image[:, :, RED] == 1.0)
    assert red.tolist() == [[0, 0], [32, 32], [63, 63]]
    assert image[0, 0, GREEN] == pytest.approx(0.1)
    assert image[32, 32, GREEN] == pytest.approx(0.55)
    assert image[63, 63, GREEN] == pytest.approx(1.0)

    blue = np.argwhere(image[:, :, BLUE] == 1.0)
    assert blue.tolist() == [[i, i] for i in range(64)]


def test_values_stay_in_unit_range(synth_records):
    for rec in synth_records[:5]:
        image = encode_scanpath(rec.scanpath)
        assert image.min() >= 0.0 and image.max() <= 1.0


def test_single_point_has_floor_green_and_no_line():
    path = Scanpath.from_points("s", "img", [(0.0, 0.25, 0.75)])
    image = encode_scanpath(path, resolution=32)
    rows, cols = pixel_coords(path, 32)
    assert (rows[0], cols[0]) == (23, 8)
    assert image[:, :, RED].sum() == 1.0
    assert image[23, 8, GREEN] == pytest.approx(0.1)
    assert image[:, :, BLUE].sum() == 0.0


def test_pixel_rounding_is_half_up():
    path = Scanpath.from_points("s", "img", [(0.0, 0.5, 0.5)])
    rows, cols = pixel_coords(path, 64)
    assert (rows[0], cols[0]) == (32, 32)


def test_repeated_pixel_keeps_latest_green():
    path = Scanpath.from_points(
        "s", "img", [(0.0, 0.5, 0.5), (1.0, 0.5, 0.5)], duration=2.0
    )
    image = encode_scanpath(path)
    assert image[32, 32, GREEN] == pytest.approx(0.1 + 0.5 * 0.9)
    assert image[:, :, BLUE].sum() == 0.0


def test_rasterize_line_halves_round_away_from_start():
    rows, cols = rasterize_line((0, 0), (2, 1))
    assert rows.tolist() == [0, 1, 2]
    assert cols.tolist() == [0, 1, 1]
    rows, cols = rasterize_line((2, 1), (0, 0))
    assert rows.tolist() == [2, 1, 0]
    assert cols.tolist() == [1, 0, 0]


def test_rasterize_line_degenerate():
    rows, cols = rasterize_line((4, 4), (4, 4))
    assert rows.tolist() == [4] and cols.tolist() == [4]


def test_larger_dot_radius_marks_neighbours(diagonal_path):
    image = encode_scanpath(diagonal_path, params=EncodingParams(64, 0.1, 2))
    assert image[31:34, 31:34, RED].sum() == 9.0
    assert image[30, 32, RED] == 0.0


def test_encoding_rejects_non_scanpath():
    with pytest.raises(InvalidScanpath):
        encode_scanpath([(0.0, 0.5, 0.5)])


@pytest.mark.parametrize(
    "kwargs", [{"resolution": 4}, {"g_floor": 1.0}, {"dot_radius": 0}]
)
def test_encoding_params_validation(kwargs):
    with pytest.raises(ValueError):
        EncodingParams(**kwargs)


def test_to_png_roundtrip(tmp_path, diagonal_path):
    image = encode_scanpath(diagonal_path)
    out = to_png(image, tmp_path / "x.png")
    pixels = np.asarray(Image.open(out))
    assert pixels.shape == (64, 64, 3)
    assert pixels.dtype == np.uint8
    assert pixels[32, 32].tolist() == [255, 140, 255]


def _half_up(value: float) -> int:
    return math.floor(value + 0.5)


def _segment_pixels(start, end) -> set[tuple[int, int]]:
    (r0, c0), (r1, c1) = start, end
    n = max(abs(r1 - r0), abs(c1 - c0))
    pixels = set()
    for i in range(n + 1):
        step = Fraction(i, n)
        dr, dc = step * (r1 - r0), step * (c1 - c0)
        r = r0 + int(math.copysign(math.floor(abs(dr) + Fraction(1, 2)), dr))
        c = c0 + int(math.copysign(math.floor(abs(dc) + Fraction(1, 2)), dc))
        pixels.add((r, c))
    return pixels


def _reference_image(path: Scanpath, params: EncodingParams) -> np.ndarray:
    """Pixel-by-pixel rendering with exact arithmetic for the segments."""
    res, g_floor, radius = params.resolution, params.g_floor, params.dot_radius
    points = [
        (_half_up(float(y) * (res - 1)), _half_up(float(x) * (res - 1)), float(t))
        for t, x, y in path.points
    ]
    duration = float(path.duration)
    line: set[tuple[int, int]] = set()
    for (ra, ca, _), (rb, cb, _) in zip(points, points[1:]):
        if (ra, ca) != (rb, cb):
            line |= _segment_pixels((ra, ca), (rb, cb))

    image = np.zeros((res, res, 3), dtype=np.float32)
    for r in range(res):
        for c in range(res):
            greens = [
                (t / duration if duration > 0 else 0.0) * (1.0 - g_floor) + g_floor
                for pr, pc, t in points
                if (r - pr) ** 2 + (c - pc) ** 2 < radius**2
            ]
            if greens:
                image[r, c, RED] = 1.0
                image[r, c, GREEN] = np.float32(max(greens))
            if (r, c) in line:
                image[r, c, BLUE] = 1.0
    return image


def _random_scanpath(rng: np.random.Generator, res: int) -> Scanpath:
    n = int(rng.integers(1, 25))
    t = np.sort(rng.uniform(0.0, 3.0, n))
    xy = rng.random((n, 2))
    # some coordinates sit exactly on pixel halves
    on_grid = rng.random((n, 2)) < 0.3
    xy[on_grid] = rng.integers(0, 2 * res - 1, on_grid.sum()) / (2 * (res - 1))
    duration = float(t[-1] + rng.uniform(0.0, 1.0))
    return Scanpath.from_points(
        "s", "img", np.column_stack([t, xy]).tolist(), duration=duration
    )


def test_matches_pixel_by_pixel_rendering():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        res = int(rng.choice([16, 32, 64]))
        radius = int(rng.integers(1, 4))
        params = EncodingParams(res, float(rng.uniform(0.0, 0.5)), radius)
        path = _random_scanpath(rng, res)
        np.testing.assert_array_equal(
            encode_scanpath(path, params=params), _reference_image(path, params)
        )
