"""Shared pytest fixtures."""

import textwrap

import numpy as np
import pytest

from gazemask.codec import Scanpath
from gazemask.config import ExperimentConfig, apply_overrides
from gazemask.data import TASKS, ImageSet, LabeledRecord, synth_generate
from gazemask.models import (
    AUTOENCODER_SCHEDULE,
    CLASSIFIER_SCHEDULE,
    train_autoencoder,
    train_classifier,
)

# the smallest resolution every architecture accepts
TINY_RESOLUTION = 16

# overrides that shrink the full pipeline to seconds of CPU time
SMOKE_OVERRIDES = [
    "data.n_subjects=2",
    "data.n_stimuli=2",
    "data.trials_per_pair=4",
    "data.n_points=12",
    "augment.copies=1",
    f"encoding.resolution={TINY_RESOLUTION}",
    "autoencoder.batch_size=4",
    "autoencoder.max_epochs=2",
    "classifier.batch_size=4",
    "classifier.max_epochs=2",
    "transfer.batch_size=4",
    "transfer.max_epochs=2",
    "dql.batch_size=8",
    "dql.max_epochs=1",
    "agent.iterations=2",
    "agent.steps=2",
    "agent.images_per_run=2",
    "agent.init_images=1",
    "agent.max_batches_per_epoch=2",
    "report.plots=false",
]


def pytest_addoption(parser):
    parser.addoption(
        "--dynamics",
        action="store_true",
        help="run the multi-seed adversarial and transfer scenarios (hours)",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--dynamics"):
        return
    skip = pytest.mark.skip(reason="needs --dynamics")
    for item in items:
        if "dynamics" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def make_config(tmp_path):
    """Factory: write a config file with given source, return its Path."""

    def _factory(name: str, src: str) -> "pathlib.Path":
        path = tmp_path / name
        path.write_text(textwrap.dedent(src), encoding="utf-8")
        return path

    return _factory


@pytest.fixture
def make_csv(tmp_path):
    """Factory: write a gaze CSV with given source, return its Path."""

    def _factory(name: str, src: str) -> "pathlib.Path":
        path = tmp_path / name
        path.write_text(textwrap.dedent(src).lstrip(), encoding="utf-8")
        return path

    return _factory


@pytest.fixture
def smoke_config(tmp_path) -> ExperimentConfig:
    """Tiny end-to-end configuration writing under ``tmp_path/run``."""
    cfg = apply_overrides(ExperimentConfig(), SMOKE_OVERRIDES)
    return cfg.with_flags(seed=3, out=str(tmp_path / "run"))


@pytest.fixture
def diagonal_path() -> Scanpath:
    return Scanpath.from_points(
        "s01",
        "img1",
        [(0.0, 0.0, 0.0), (0.5, 0.5, 0.5), (1.0, 1.0, 1.0)],
        duration=1.0,
    )


@pytest.fixture
def synth_records() -> list[LabeledRecord]:
    return synth_generate(3, 2, 4, 1.0, np.random.default_rng(0), n_points=12)


def _tiny_image_set() -> ImageSet:
    """Random 16x16 images: 2 subjects x 2 stimuli x 3 each."""
    rng = np.random.default_rng(1)
    subject = np.repeat([0, 1], 6)
    stimulus = np.tile(np.repeat([0, 1], 3), 2)
    images = rng.random((12, TINY_RESOLUTION, TINY_RESOLUTION, 3)).astype(np.float32)
    return ImageSet(images, subject, stimulus, "train")


@pytest.fixture
def tiny_images() -> ImageSet:
    return _tiny_image_set()


@pytest.fixture(scope="session")
def tiny_models():
    """Autoencoder and per-task classifiers trained for two epochs on tiny images."""
    images = _tiny_image_set()
    autoencoder, _ = train_autoencoder(
        images.images,
        AUTOENCODER_SCHEDULE.with_overrides(max_epochs=2, batch_size=4),
        np.random.default_rng(0),
    )
    schedule = CLASSIFIER_SCHEDULE.with_overrides(max_epochs=2, batch_size=4)
    classifiers = {
        task: train_classifier(
            images.images, images.labels(task), 2, schedule, np.random.default_rng(1)
        )[0]
        for task in TASKS
    }
    return autoencoder, classifiers
