"""Labeled recordings, dataset splits and encoded image sets."""

from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from gazemask.codec import EncodingParams, Scanpath, encode_scanpath
from gazemask.errors import DataError
from gazemask.flow.parallel import parallel_map

TASKS: tuple[str, str] = ("subject", "stimulus")

Provenance = Literal["train", "test"]


class ProvenanceError(DataError):
    """Raised when test-set data reaches a train-only store."""


def chance_level(n_classes: int) -> float:
    """Accuracy of uniform guessing over ``n_classes``."""
    if n_classes < 1:
        raise ValueError(f"n_classes must be >= 1, got {n_classes}")
    return 1.0 / n_classes


@dataclass(frozen=True, eq=False)
class LabeledRecord:
    """A scanpath with integer subject and stimulus class indices."""

    scanpath: Scanpath
    subject_label: int
    stimulus_label: int

    def __post_init__(self) -> None:
        for name in ("subject_label", "stimulus_label"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 0:
                raise ValueError(f"{name} must be a non-negative int, got {value!r}")
            object.__setattr__(self, name, int(value))

    def label(self, task: str) -> int:
        if task == "subject":
            return self.subject_label
        if task == "stimulus":
            return self.stimulus_label
        raise KeyError(f"unknown task {task!r} (valid: {TASKS})")


@dataclass(frozen=True)
class LabelSpace:
    """Sorted class names per task; index in the tuple is the class label."""

    subjects: tuple[str, ...]
    stimuli: tuple[str, ...]

    @classmethod
    def from_records(cls, records: Iterable[LabeledRecord]) -> "LabelSpace":
        subjects: dict[int, str] = {}
        stimuli: dict[int, str] = {}
        for rec in records:
            subjects[rec.subject_label] = rec.scanpath.subject_id
            stimuli[rec.stimulus_label] = rec.scanpath.stimulus_id
        return cls(
            subjects=tuple(subjects[i] for i in sorted(subjects)),
            stimuli=tuple(stimuli[i] for i in sorted(stimuli)),
        )

    def n_classes(self, task: str) -> int:
        if task == "subject":
            return len(self.subjects)
        if task == "stimulus":
            return len(self.stimuli)
        raise KeyError(f"unknown task {task!r} (valid: {TASKS})")

    def as_dict(self) -> dict[str, int]:
        return {task: self.n_classes(task) for task in TASKS}


@dataclass
class DatasetSplit:
    """Disjoint train/test partitions of a record list."""

    train: list[LabeledRecord] = field(default_factory=list)
    test: list[LabeledRecord] = field(default_factory=list)

    def __post_init__(self) -> None:
        train_ids = {id(r) for r in self.train}
        if any(id(r) in train_ids for r in self.test):
            raise ValueError("train and test share a record")


@dataclass(eq=False)
class ImageSet:
    """
    Encoded images with their labels and provenance.

    ``images`` has shape ``(N, H, W, 3)`` (float32); label arrays are int64.
    Provenance travels with the set so train-only stores can refuse test data.
    """

    images: np.ndarray
    subject: np.ndarray
    stimulus: np.ndarray
    provenance: Provenance = "train"

    def __post_init__(self) -> None:
        self.images = np.asarray(self.images, dtype=np.float32)
        self.subject = np.asarray(self.subject, dtype=np.int64)
        self.stimulus = np.asarray(self.stimulus, dtype=np.int64)
        if self.images.ndim != 4 or self.images.shape[-1] != 3:
            raise ValueError(
                f"images must have shape (N, H, W, 3), got {self.images.shape}"
            )
        n = self.images.shape[0]
        if self.subject.shape != (n,) or self.stimulus.shape != (n,):
            raise ValueError("label arrays must match the number of images")
        if self.provenance not in ("train", "test"):
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def __len__(self) -> int:
        return int(self.images.shape[0])

    def labels(self, task: str) -> np.ndarray:
        if task == "subject":
            return self.subject
        if task == "stimulus":
            return self.stimulus
        raise KeyError(f"unknown task {task!r} (valid: {TASKS})")

    def subset(self, index: np.ndarray | Sequence[int]) -> "ImageSet":
        idx = np.asarray(index, dtype=np.int64)
        return ImageSet(
            self.images[idx], self.subject[idx], self.stimulus[idx], self.provenance
        )

    def with_images(self, images: np.ndarray) -> "ImageSet":
        """Same labels and provenance, different pixels (e.g. manipulated)."""
        return ImageSet(images, self.subject, self.stimulus, self.provenance)

    @classmethod
    def concat(cls, sets: Sequence["ImageSet"]) -> "ImageSet":
        if not sets:
            raise ValueError("concat needs at least one ImageSet")
        provenance = {s.provenance for s in sets}
        if len(provenance) != 1:
            raise ProvenanceError(f"cannot mix provenances {sorted(provenance)}")
        return cls(
            np.concatenate([s.images for s in sets]),
            np.concatenate([s.subject for s in sets]),
            np.concatenate([s.stimulus for s in sets]),
            sets[0].provenance,
        )


def encode_records(
    records: Sequence[LabeledRecord],
    params: EncodingParams | None = None,
    provenance: Provenance = "train",
    workers: int | None = 1,
    scanpaths: Sequence[Scanpath] | None = None,
) -> ImageSet:
    """
    Encode records into an :class:`ImageSet`.

    ``scanpaths`` replaces the records' own scanpaths (same order), which is
    how augmented variants are encoded with their source labels.
    """
    params = params or EncodingParams()
    paths = list(scanpaths) if scanpaths is not None else [r.scanpath for r in records]
    if len(paths) != len(records):
        raise ValueError("scanpaths must align with records")
    images = parallel_map(
        lambda p: encode_scanpath(p, params=params), paths, workers=workers
    )
    res = params.resolution
    stack = (
        np.stack(images) if images else np.zeros((0, res, res, 3), dtype=np.float32)
    )
    return ImageSet(
        stack,
        [r.subject_label for r in records],
        [r.stimulus_label for r in records],
        provenance,
    )
