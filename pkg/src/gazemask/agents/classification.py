"""The Classification Agent: a growing memory of manipulated training images."""

import contextlib
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Mapping, Sequence

import numpy as np

from gazemask.data.records import ImageSet, ProvenanceError
from gazemask.errors import DataError, GazemaskError
from gazemask.models.architectures import ClassifierModel
from gazemask.models.checkpoint import Container, load_container, save_container
from gazemask.models.schedule import CLASSIFIER_SCHEDULE, TrainingSchedule
from gazemask.models.training import TrainingTrace, accuracy, train_classifier

logger = logging.getLogger(__name__)


class PhaseError(GazemaskError):
    """Raised when recording is attempted while classifiers are adapting."""


class ClassifierMemory:
    """
    Append-only store of manipulated training images with their labels and the
    iteration they were produced in.
    """

    def __init__(self) -> None:
        self._images: list[np.ndarray] = []
        self._subject: list[int] = []
        self._stimulus: list[int] = []
        self._iteration: list[int] = []
        self._phase = "recording"
        self._lock = threading.Lock()

    @property
    def phase(self) -> str:
        return self._phase

    def __len__(self) -> int:
        return len(self._images)

    def record(
        self,
        image: np.ndarray,
        subject_label: int,
        stimulus_label: int,
        iteration: int,
        provenance: str = "train",
    ) -> None:
        if provenance != "train":
            raise ProvenanceError(
                "images from the test set are never stored for adaptation"
            )
        if subject_label < 0 or stimulus_label < 0:
            raise ValueError("labels must be non-negative")
        with self._lock:
            if self._phase != "recording":
                raise PhaseError("cannot record while classifiers are adapting")
            self._images.append(np.asarray(image, dtype=np.float32))
            self._subject.append(int(subject_label))
            self._stimulus.append(int(stimulus_label))
            self._iteration.append(int(iteration))

    def iterations(self) -> np.ndarray:
        return np.asarray(self._iteration, dtype=np.int64)

    def as_image_set(self) -> ImageSet:
        if not self._images:
            raise DataError("classifier memory is empty")
        return ImageSet(
            np.stack(self._images), self._subject, self._stimulus, provenance="train"
        )

    @contextlib.contextmanager
    def adapting(self) -> Iterator[None]:
        """Block recording for the duration of the block."""
        with self._lock:
            if self._phase == "adapting":
                raise PhaseError("classifiers are already adapting")
            self._phase = "adapting"
        try:
            yield
        finally:
            self._phase = "recording"

    def to_container(self, meta: Mapping[str, Any] | None = None) -> Container:
        images = (
            np.stack(self._images)
            if self._images
            else np.zeros((0, 0, 0, 3), dtype=np.float32)
        )
        return Container(
            "classifier-memory",
            {
                "images": images,
                "subject": np.asarray(self._subject, dtype=np.int64),
                "stimulus": np.asarray(self._stimulus, dtype=np.int64),
                "iteration": np.asarray(self._iteration, dtype=np.int64),
            },
            meta=dict(meta or {}),
        )

    def save(self, dest: str | Path, meta: Mapping[str, Any] | None = None) -> None:
        save_container(self.to_container(meta), dest)

    @classmethod
    def load(cls, source: str | Path) -> "ClassifierMemory":
        container = load_container(source)
        if container.arch_id != "classifier-memory":
            raise DataError(
                f"not a classifier memory container: {container.arch_id!r}"
            )
        mem = cls()
        t = container.tensors
        for img, sub, stim, it in zip(
            t["images"], t["subject"], t["stimulus"], t["iteration"]
        ):
            mem.record(img, int(sub), int(stim), int(it))
        return mem


def record_batch(mem: ClassifierMemory, images: ImageSet, iteration: int) -> int:
    """Record every image of a manipulated training set; returns the new size."""
    if images.provenance != "train":
        raise ProvenanceError(
            "images from the test set are never stored for adaptation"
        )
    for img, sub, stim in zip(images.images, images.subject, images.stimulus):
        mem.record(img, int(sub), int(stim), iteration)
    return len(mem)


@dataclass
class AdaptResult:
    classifiers: dict[str, ClassifierModel]
    accuracy: dict[str, float] = field(default_factory=dict)
    traces: dict[str, TrainingTrace] = field(default_factory=dict)
    train_size: int = 0


def adapt(
    mem: ClassifierMemory,
    base_train: ImageSet,
    n_classes: Mapping[str, int],
    rng: np.random.Generator,
    schedule: TrainingSchedule = CLASSIFIER_SCHEDULE,
    test: ImageSet | None = None,
    tasks: Sequence[str] | None = None,
) -> AdaptResult:
    """
    Retrain every classifier from scratch on ``base_train`` plus the memory.

    Args:
        mem: Manipulated images seen so far (may be empty).
        base_train: Unmanipulated training images.
        n_classes: Class count per task.
        rng: Source of the fresh initializations and batch orders.
        schedule: Classifier schedule.
        test: When given, post-adaptation accuracy on it is reported.
        tasks: Tasks to retrain; defaults to every key of ``n_classes``.

    Raises:
        MissingClass: A class has no example in the union.
    """
    tasks = list(tasks) if tasks is not None else list(n_classes)
    with mem.adapting():
        pool = (
            ImageSet.concat([base_train, mem.as_image_set()])
            if len(mem)
            else base_train
        )
        result = AdaptResult(classifiers={}, train_size=len(pool))
        for task in tasks:
            model, trace = train_classifier(
                pool.images, pool.labels(task), n_classes[task], schedule, rng
            )
            result.classifiers[task] = model
            result.traces[task] = trace
            if test is not None:
                result.accuracy[task] = accuracy(model, test.images, test.labels(task))
    logger.info(
        "adapted %s on %d images (%d manipulated): %s",
        ",".join(tasks),
        len(pool),
        len(mem),
        {k: round(v, 4) for k, v in result.accuracy.items()},
    )
    return result
