"""Tests for gazemask.agents.classification."""

import numpy as np
import pytest

from gazemask.agents import ClassifierMemory, PhaseError, adapt, record_batch
from gazemask.data import ImageSet, ProvenanceError
from gazemask.errors import DataError
from gazemask.models import CLASSIFIER_SCHEDULE

SCHEDULE = CLASSIFIER_SCHEDULE.with_overrides(max_epochs=1, batch_size=4)


def test_record_and_read_back(tiny_images):
    mem = ClassifierMemory()
    assert record_batch(mem, tiny_images, iteration=1) == 12
    assert record_batch(mem, tiny_images.subset([0, 1]), iteration=2) == 14
    assert mem.iterations().tolist() == [1] * 12 + [2] * 2
    stored = mem.as_image_set()
    assert stored.provenance == "train"
    np.testing.assert_array_equal(stored.subject[:12], tiny_images.subject)


def test_test_images_are_refused(tiny_images):
    mem = ClassifierMemory()
    test_set = ImageSet(
        tiny_images.images[:1],
        tiny_images.subject[:1],
        tiny_images.stimulus[:1],
        "test",
    )
    with pytest.raises(ProvenanceError):
        record_batch(mem, test_set, iteration=1)
    with pytest.raises(ProvenanceError):
        mem.record(test_set.images[0], 0, 0, 1, provenance="test")
    assert len(mem) == 0


def test_empty_memory_has_no_image_set():
    with pytest.raises(DataError):
        ClassifierMemory().as_image_set()


def test_recording_is_blocked_while_adapting(tiny_images):
    mem = ClassifierMemory()
    with mem.adapting():
        assert mem.phase == "adapting"
        with pytest.raises(PhaseError):
            mem.record(tiny_images.images[0], 0, 0, 1)
        with pytest.raises(PhaseError):
            with mem.adapting():
                pass
    assert mem.phase == "recording"
    mem.record(tiny_images.images[0], 0, 0, 1)


def test_save_load(tmp_path, tiny_images):
    mem = ClassifierMemory()
    record_batch(mem, tiny_images.subset([3, 7]), iteration=4)
    mem.save(tmp_path / "mem.gzm")
    loaded = ClassifierMemory.load(tmp_path / "mem.gzm")
    assert len(loaded) == 2
    assert loaded.iterations().tolist() == [4, 4]
    np.testing.assert_array_equal(
        loaded.as_image_set().images, tiny_images.images[[3, 7]]
    )


def test_adapt_trains_on_the_union(tiny_images):
    mem = ClassifierMemory()
    n_classes = {"subject": 2, "stimulus": 2}
    empty = adapt(mem, tiny_images, n_classes, np.random.default_rng(0), SCHEDULE)
    assert empty.train_size == 12
    assert set(empty.classifiers) == {"subject", "stimulus"}
    assert empty.accuracy == {}

    record_batch(mem, tiny_images.subset(range(6)), iteration=1)
    result = adapt(
        mem,
        tiny_images,
        n_classes,
        np.random.default_rng(0),
        SCHEDULE,
        test=tiny_images,
        tasks=["subject"],
    )
    assert result.train_size == 18
    assert list(result.classifiers) == ["subject"]
    assert 0.0 <= result.accuracy["subject"] <= 1.0
    assert result.traces["subject"].epochs == 1
    assert mem.phase == "recording"
