"""Tests for gazemask.data.csv_io."""

import io

import numpy as np
import pytest

from gazemask.data import (
    ColumnSchema,
    DataWarning,
    RowError,
    SchemaError,
    load_gaze_csv,
    write_gaze_csv,
)
from gazemask.errors import DataError

BASIC = """
subject,stimulus,trial,t,x,y
bob,dog,0,10.0,0.1,0.2
bob,dog,0,10.5,0.3,0.4
alice,dog,0,0.0,0.5,0.5
alice,cat,1,0.0,0.2,0.2
alice,cat,1,1.0,0.8,0.9
"""


def test_load_basic(make_csv):
    records = load_gaze_csv(make_csv("g.csv", BASIC))
    assert len(records) == 3
    keys = [
        (r.scanpath.subject_id, r.scanpath.stimulus_id, r.scanpath.trial_id)
        for r in records
    ]
    assert keys == [("alice", "cat", "1"), ("alice", "dog", "0"), ("bob", "dog", "0")]
    # sorted names give the class indices
    assert [(r.subject_label, r.stimulus_label) for r in records] == [
        (0, 0),
        (0, 1),
        (1, 1),
    ]


def test_timestamps_start_at_zero(make_csv):
    records = load_gaze_csv(make_csv("g.csv", BASIC))
    bob = records[2].scanpath
    np.testing.assert_allclose(bob.t, [0.0, 0.5])


def test_missing_column(make_csv):
    path = make_csv("g.csv", "subject,stimulus,t,x\nbob,dog,0,0.1\n")
    with pytest.raises(SchemaError, match="y"):
        load_gaze_csv(path)


def test_unparsable_row_reports_line(make_csv):
    path = make_csv(
        "g.csv",
        """
        subject,stimulus,trial,t,x,y
        bob,dog,0,0.0,0.1,0.2
        bob,dog,0,0.5,abc,0.4
        """,
    )
    with pytest.raises(RowError) as exc_info:
        load_gaze_csv(path)
    assert exc_info.value.line == 3
    assert exc_info.value.column == "x"
    assert isinstance(exc_info.value, DataError)


def test_clamp_off_stimulus(make_csv):
    path = make_csv(
        "g.csv",
        """
        subject,stimulus,trial,t,x,y
        bob,dog,0,0.0,-0.2,0.5
        bob,dog,0,0.5,1.3,0.4
        """,
    )
    (record,) = load_gaze_csv(path)
    np.testing.assert_allclose(record.scanpath.x, [0.0, 1.0])


def test_reject_drops_samples_with_warning(make_csv):
    path = make_csv(
        "g.csv",
        """
        subject,stimulus,trial,t,x,y
        bob,dog,0,0.0,0.5,0.5
        bob,dog,0,0.5,1.3,0.4
        bob,cat,0,0.0,1.5,0.5
        """,
    )
    with pytest.warns(DataWarning):
        records = load_gaze_csv(path, out_of_range="reject")
    assert len(records) == 1
    assert len(records[0].scanpath) == 1


def test_extent_columns_normalize(make_csv):
    path = make_csv(
        "g.csv",
        """
        subject,stimulus,trial,t,x,y,extent_x,extent_y
        bob,dog,0,0.0,960,540,1920,1080
        """,
    )
    (record,) = load_gaze_csv(path)
    np.testing.assert_allclose(record.scanpath.points[0, 1:], [0.5, 0.5])


def test_schema_remaps_columns_and_extent(make_csv):
    path = make_csv(
        "g.csv",
        """
        participant,image,time,gx,gy
        p1,i1,0.0,100,50
        """,
    )
    schema = ColumnSchema(
        subject="participant",
        stimulus="image",
        t="time",
        x="gx",
        y="gy",
        stimulus_extent=(200.0, 100.0),
    )
    (record,) = load_gaze_csv(path, schema)
    assert record.scanpath.subject_id == "p1"
    np.testing.assert_allclose(record.scanpath.points[0, 1:], [0.5, 0.5])


def test_gap_segmentation_without_trial_column(make_csv):
    path = make_csv(
        "g.csv",
        """
        subject,stimulus,t,x,y
        bob,dog,0.0,0.1,0.1
        bob,dog,0.5,0.2,0.2
        bob,dog,5.0,0.3,0.3
        bob,dog,5.2,0.4,0.4
        """,
    )
    records = load_gaze_csv(path, trial_gap=1.0)
    assert [r.scanpath.trial_id for r in records] == ["0", "1"]
    assert [len(r.scanpath) for r in records] == [2, 2]


def test_unknown_out_of_range_mode(make_csv):
    with pytest.raises(ValueError):
        load_gaze_csv(make_csv("g.csv", BASIC), out_of_range="wrap")


def test_write_then_load_preserves_points(synth_records):
    buf = io.StringIO()
    write_gaze_csv(synth_records, buf)
    buf.seek(0)
    loaded = load_gaze_csv(buf)
    assert len(loaded) == len(synth_records)
    for a, b in zip(loaded, synth_records):
        assert a.scanpath.subject_id == b.scanpath.subject_id
        np.testing.assert_allclose(a.scanpath.points, b.scanpath.points, atol=1e-8)
