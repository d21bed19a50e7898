"""Tests for gazemask.data.synth."""

import numpy as np
import pytest

from gazemask.data import synth_generate


def test_counts_and_labels():
    records = synth_generate(4, 3, 2, 1.0, np.random.default_rng(0), n_points=10)
    assert len(records) == 24
    assert {r.subject_label for r in records} == {0, 1, 2, 3}
    assert {r.stimulus_label for r in records} == {0, 1, 2}
    assert all(len(r.scanpath) == 10 for r in records)
    assert all(r.scanpath.duration == 8.0 for r in records)


def test_same_seed_same_records():
    a = synth_generate(2, 2, 2, 1.0, np.random.default_rng(5))
    b = synth_generate(2, 2, 2, 1.0, np.random.default_rng(5))
    for ra, rb in zip(a, b):
        np.testing.assert_array_equal(ra.scanpath.points, rb.scanpath.points)


def test_zero_strength_removes_time_signature():
    records = synth_generate(3, 2, 2, 0.0, np.random.default_rng(0), n_points=6)
    times = {tuple(r.scanpath.t) for r in records}
    assert len(times) == 1


def test_full_strength_subjects_differ_in_timing():
    records = synth_generate(3, 2, 2, 1.0, np.random.default_rng(0), n_points=6)
    times = {tuple(r.scanpath.t) for r in records}
    assert len(times) == 3


def test_curve_offset_changes_stimuli():
    base = synth_generate(2, 2, 2, 0.0, np.random.default_rng(1), n_points=16)
    shifted = synth_generate(
        2, 2, 2, 0.0, np.random.default_rng(1), n_points=16, curve_offset=4
    )
    assert not np.allclose(base[0].scanpath.points, shifted[0].scanpath.points)
    assert shifted[0].scanpath.stimulus_id == "stimulus00"


@pytest.mark.parametrize(
    "args, kwargs",
    [
        ((1, 2, 2, 1.0), {}),
        ((2, 2, 2, 1.5), {}),
        ((2, 2, 2, 1.0), {"curve_offset": -1}),
        ((2, 2, 2, 1.0), {"n_points": 1}),
    ],
)
def test_invalid_arguments(args, kwargs):
    with pytest.raises(ValueError):
        synth_generate(*args, np.random.default_rng(0), **kwargs)
