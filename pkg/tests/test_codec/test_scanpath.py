"""Tests for gazemask.codec.scanpath."""

import numpy as np
import pytest

from gazemask.codec import GazePoint, InvalidScanpath, Scanpath
from gazemask.errors import DataError


def test_from_points_defaults_duration_to_last_timestamp():
    path = Scanpath.from_points("s", "img", [(0.0, 0.1, 0.2), (2.5, 0.3, 0.4)])
    assert len(path) == 2
    assert path.duration == 2.5
    assert path.gaze_points()[1] == GazePoint(2.5, 0.3, 0.4)


def test_points_are_read_only(diagonal_path):
    with pytest.raises(ValueError):
        diagonal_path.points[0, 1] = 0.9


@pytest.mark.parametrize(
    "points, match",
    [
        ([], "no points"),
        ([(0.0, 1.5, 0.5)], r"\[0, 1\]"),
        ([(0.0, 0.5, -0.1)], r"\[0, 1\]"),
        ([(1.0, 0.5, 0.5), (0.5, 0.5, 0.5)], "non-decreasing"),
        ([(-1.0, 0.5, 0.5)], "negative"),
        ([(0.0, np.nan, 0.5)], "non-finite"),
    ],
)
def test_invalid_scanpaths_rejected(points, match):
    with pytest.raises(InvalidScanpath, match=match):
        Scanpath.from_points("s", "img", points)


def test_duration_shorter_than_last_timestamp():
    with pytest.raises(InvalidScanpath, match="duration"):
        Scanpath.from_points("s", "img", [(0.0, 0.5, 0.5), (2.0, 0.5, 0.5)], 1.0)


def test_invalid_scanpath_is_a_data_error():
    assert issubclass(InvalidScanpath, DataError)


def test_with_points_keeps_labels(diagonal_path):
    moved = diagonal_path.with_points(diagonal_path.points[:2])
    assert (moved.subject_id, moved.stimulus_id) == ("s01", "img1")
    assert moved.duration == diagonal_path.duration
    assert len(moved) == 2
