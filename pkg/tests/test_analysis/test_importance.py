"""Tests for gazemask.analysis.importance."""

import numpy as np
import pytest

from gazemask.analysis import (
    ChannelImportance,
    aggregate_importance,
    changed_counts,
    channel_importance,
    importance_table,
)
from gazemask.models import ShapeError


def test_unchanged_image_is_degenerate():
    image = np.random.default_rng(0).random((8, 8, 3))
    imp = channel_importance(image, image.copy())
    assert imp.degenerate
    assert imp.as_tuple() == (0.0, 0.0, 0.0)


def test_percentages_follow_changed_counts():
    before = np.zeros((4, 4, 3))
    after = before.copy()
    after[0, :, 0] = 0.5  # 4 red values
    after[1, :2, 2] = 0.5  # 2 blue values
    after[3, 3, 1] = 1e-3  # below the threshold
    assert changed_counts(before, after).tolist() == [4, 0, 2]
    imp = channel_importance(before, after)
    assert not imp.degenerate
    assert imp.red_pct == pytest.approx(200 / 3)
    assert imp.green_pct == 0.0
    assert sum(imp.as_tuple()) == pytest.approx(100.0)


def test_threshold_is_strict():
    before = np.zeros((1, 1, 3))
    after = np.full((1, 1, 3), 0.1)
    assert changed_counts(before, after, tau=0.1).tolist() == [0, 0, 0]
    with pytest.raises(ValueError):
        changed_counts(before, after, tau=0.0)


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        channel_importance(np.zeros((2, 2, 3)), np.zeros((2, 3, 3)))
    with pytest.raises(ShapeError):
        channel_importance(np.zeros((2, 2, 4)), np.zeros((2, 2, 4)))


def test_aggregate_pools_counts():
    before = np.zeros((2, 2, 2, 3))
    after = before.copy()
    after[0, 0, 0, 0] = 1.0
    after[1, :, :, 1] = 1.0
    imp = aggregate_importance(before, after)
    assert imp.as_tuple() == pytest.approx((20.0, 80.0, 0.0))


def test_importance_table_is_sorted():
    table = importance_table(
        {
            2: ChannelImportance(10.0, 20.0, 70.0),
            1: ChannelImportance(0.0, 0.0, 0.0, degenerate=True),
        }
    )
    assert table["iteration"].tolist() == [1, 2]
    assert list(table.columns) == ["iteration", "red_pct", "green_pct", "blue_pct"]
    assert table.loc[1, "blue_pct"] == 70.0
