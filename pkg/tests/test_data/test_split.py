"""Tests for gazemask.data.split."""

from collections import Counter

import numpy as np
import pytest

from gazemask.data import SplitWarning, split_fifty_fifty, synth_generate


def _counts(records, attr):
    return Counter(getattr(r, attr) for r in records)


@pytest.mark.parametrize("trials", [2, 3, 5])
def test_split_is_balanced_per_class(trials):
    records = synth_generate(3, 3, trials, 1.0, np.random.default_rng(0), n_points=4)
    split = split_fifty_fifty(records, np.random.default_rng(1))
    assert len(split.train) + len(split.test) == len(records)
    assert abs(len(split.train) - len(split.test)) <= 1
    for attr in ("subject_label", "stimulus_label"):
        train, test = _counts(split.train, attr), _counts(split.test, attr)
        for label in range(3):
            assert abs(train[label] - test[label]) <= 1
            assert train[label] > 0


def test_split_is_disjoint_and_ordered(synth_records):
    split = split_fifty_fifty(synth_records, np.random.default_rng(0))
    train_ids = {id(r) for r in split.train}
    assert not any(id(r) in train_ids for r in split.test)
    position = {id(r): i for i, r in enumerate(synth_records)}
    assert [position[id(r)] for r in split.train] == sorted(
        position[id(r)] for r in split.train
    )


def test_split_depends_only_on_rng(synth_records):
    a = split_fifty_fifty(synth_records, np.random.default_rng(4))
    b = split_fifty_fifty(synth_records, np.random.default_rng(4))
    assert [id(r) for r in a.test] == [id(r) for r in b.test]


def test_singleton_cells_go_to_train():
    records = synth_generate(2, 2, 2, 1.0, np.random.default_rng(0), n_points=4)
    # keep one record of the (0, 0) cell
    records = [records[0], *records[2:]]
    with pytest.warns(SplitWarning):
        split = split_fifty_fifty(records, np.random.default_rng(0))
    assert records[0] in split.train
