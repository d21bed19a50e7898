"""Tests for gazemask.models.checkpoint."""

import io

import numpy as np
import pytest
import torch

from gazemask.models import (
    AutoencoderModel,
    CheckpointError,
    ClassifierModel,
    Container,
    DqlModel,
    load_container,
    load_model,
    parameter_hash,
    save_container,
    save_model,
)
from gazemask.models.checkpoint import dump_container, model_bytes, parse_container


@pytest.mark.parametrize(
    "model",
    [
        AutoencoderModel(resolution=16),
        ClassifierModel(3, resolution=16),
        DqlModel(resolution=16),
    ],
    ids=["autoencoder", "classifier", "dql"],
)
def test_model_roundtrip(tmp_path, model):
    path = tmp_path / "m.gzm"
    save_model(model, path, seed=11, epoch=4, meta={"task": "subject"})
    loaded, container = load_model(path)
    assert type(loaded) is type(model)
    assert container.seed == 11 and container.epoch == 4
    assert container.meta == {"resolution": 16, "task": "subject"}
    assert parameter_hash(loaded) == parameter_hash(model)
    for (name, a), (_, b) in zip(
        model.state_dict().items(), loaded.state_dict().items()
    ):
        torch.testing.assert_close(a, b, msg=name)


def test_same_content_same_bytes():
    model = ClassifierModel(2, resolution=16)
    assert model_bytes(model, seed=1) == model_bytes(model, seed=1)
    assert model_bytes(model, seed=1) != model_bytes(model, seed=2)


def test_parameter_hash_ignores_header():
    model = DqlModel(resolution=16)
    before = parameter_hash(model)
    model_bytes(model, seed=99, meta={"x": 1})
    assert parameter_hash(model) == before
    with torch.no_grad():
        next(model.parameters()).add_(1.0)
    assert parameter_hash(model) != before


def test_container_dtypes_roundtrip():
    tensors = {
        "f32": np.arange(6, dtype=np.float32).reshape(2, 3),
        "f64": np.array([0.5]),
        "i64": np.array([-1, 2], dtype=np.int64),
        "u8": np.array([1, 255], dtype=np.uint8),
        "flag": np.array([True, False]),
        "empty": np.zeros((0, 4), dtype=np.float32),
    }
    buf = io.BytesIO()
    save_container(Container("store", tensors, meta={"k": "v"}), buf)
    buf.seek(0)
    loaded = load_container(buf)
    assert list(loaded.tensors) == list(tensors)
    np.testing.assert_array_equal(loaded.tensors["f32"], tensors["f32"])
    np.testing.assert_array_equal(loaded.tensors["flag"], [1, 0])
    assert loaded.tensors["empty"].shape == (0, 4)
    assert loaded.meta == {"k": "v"}


def test_rejects_foreign_and_damaged_files():
    data = dump_container(Container("store", {"a": np.zeros(3)}))
    with pytest.raises(CheckpointError, match="magic"):
        parse_container(b"XXXX" + data[4:])
    with pytest.raises(CheckpointError, match="truncated"):
        parse_container(data[:-3])
    with pytest.raises(CheckpointError, match="trailing"):
        parse_container(data + b"\0")
    with pytest.raises(CheckpointError, match="version"):
        parse_container(data[:4] + b"\x09\x00" + data[6:])


def test_unknown_architecture(tmp_path):
    path = tmp_path / "x.gzm"
    save_container(Container("transformer", {}), path)
    with pytest.raises(CheckpointError):
        load_model(path)


def test_mismatched_tensors(tmp_path):
    path = tmp_path / "x.gzm"
    save_model(ClassifierModel(2, resolution=16), path)
    container = load_container(path)
    container.n_classes = 3
    save_container(container, path)
    with pytest.raises(CheckpointError, match="does not match"):
        load_model(path)
