"""Tests for gazemask.data.records."""

import numpy as np
import pytest

from gazemask.codec import EncodingParams
from gazemask.data import (
    DatasetSplit,
    ImageSet,
    LabeledRecord,
    LabelSpace,
    ProvenanceError,
    chance_level,
    encode_records,
)


def test_chance_level():
    assert chance_level(4) == 0.25
    assert chance_level(8) == 0.125
    with pytest.raises(ValueError):
        chance_level(0)


def test_labeled_record_validation(diagonal_path):
    rec = LabeledRecord(diagonal_path, np.int64(2), 1)
    assert rec.label("subject") == 2 and type(rec.subject_label) is int
    assert rec.label("stimulus") == 1
    with pytest.raises(ValueError):
        LabeledRecord(diagonal_path, -1, 0)
    with pytest.raises(KeyError):
        rec.label("gender")


def test_label_space(synth_records):
    space = LabelSpace.from_records(synth_records)
    assert space.subjects == ("subject00", "subject01", "subject02")
    assert space.stimuli == ("stimulus00", "stimulus01")
    assert space.as_dict() == {"subject": 3, "stimulus": 2}


def test_dataset_split_rejects_shared_records(synth_records):
    with pytest.raises(ValueError):
        DatasetSplit(train=synth_records[:2], test=synth_records[1:3])


def test_image_set_shapes(tiny_images):
    assert len(tiny_images) == 12
    sub = tiny_images.subset([0, 11])
    assert sub.subject.tolist() == [0, 1]
    assert sub.provenance == "train"
    with pytest.raises(ValueError):
        ImageSet(np.zeros((2, 4, 4)), [0, 0], [0, 0])
    with pytest.raises(ValueError):
        ImageSet(np.zeros((2, 4, 4, 3)), [0], [0, 0])


def test_image_set_concat_refuses_mixed_provenance(tiny_images):
    test = ImageSet(
        tiny_images.images, tiny_images.subject, tiny_images.stimulus, "test"
    )
    assert len(ImageSet.concat([tiny_images, tiny_images])) == 24
    with pytest.raises(ProvenanceError):
        ImageSet.concat([tiny_images, test])


def test_with_images_keeps_labels(tiny_images):
    out = tiny_images.with_images(np.zeros_like(tiny_images.images))
    np.testing.assert_array_equal(out.stimulus, tiny_images.stimulus)
    assert out.images.sum() == 0.0


def test_encode_records(synth_records):
    params = EncodingParams(resolution=32)
    images = encode_records(synth_records, params, "test")
    assert images.images.shape == (len(synth_records), 32, 32, 3)
    assert images.provenance == "test"
    assert images.subject.tolist() == [r.subject_label for r in synth_records]


def test_encode_records_worker_count_does_not_matter(synth_records):
    params = EncodingParams(resolution=32)
    one = encode_records(synth_records, params, workers=1)
    many = encode_records(synth_records, params, workers=4)
    np.testing.assert_array_equal(one.images, many.images)


def test_encode_records_with_replacement_paths(synth_records):
    params = EncodingParams(resolution=32)
    swapped = [synth_records[1].scanpath, synth_records[0].scanpath]
    images = encode_records(synth_records[:2], params, scanpaths=swapped)
    direct = encode_records(synth_records[1:2], params)
    np.testing.assert_array_equal(images.images[0], direct.images[0])
    assert images.subject[0] == synth_records[0].subject_label
    with pytest.raises(ValueError):
        encode_records(synth_records[:2], params, scanpaths=swapped[:1])
