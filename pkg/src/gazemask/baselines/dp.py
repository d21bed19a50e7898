"""
Laplacian-mechanism baselines on raw gaze and on encoded images.

Raw gaze: Laplace noise on x and y of every point with scale
``sensitivity / epsilon``; points pushed off the stimulus are dropped and
fewer than three survivors means the copy is skipped.

Images: per-pixel Laplace noise per channel with scale
``sensitivity[c] / epsilon``; the reported budget is ``epsilon`` times the
number of pixels (sequential composition over a 64x64 image gives x4096).
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal, Mapping, Sequence

import numpy as np
import pandas as pd
from scipy.spatial.distance import pdist

from gazemask.codec import EncodingParams, Scanpath, encode_scanpath
from gazemask.data.records import ImageSet, LabeledRecord
from gazemask.errors import DataError
from gazemask.flow.parallel import parallel_map
from gazemask.models.architectures import ClassifierModel
from gazemask.models.training import InsufficientData, classify
from gazemask.utils import make_rng

logger = logging.getLogger(__name__)

Domain = Literal["raw", "image"]

FRONTIER_COLUMNS = ["epsilon", "domain", "stim_acc", "sub_acc", "skipped_fraction"]
MIN_SURVIVING_POINTS = 3
DEFAULT_REPETITIONS = 100


class InvalidScale(DataError, ValueError):
    """Raised for a non-positive or non-finite noise scale / epsilon."""


class NoFeasibleEpsilon(DataError):
    """No frontier row puts subject accuracy within tolerance of chance."""

    def __init__(self, message: str, nearest: Mapping | None = None) -> None:
        super().__init__(message)
        self.nearest = dict(nearest) if nearest is not None else None


@dataclass(frozen=True)
class Skipped:
    """A noised copy that kept too few points to be used."""

    remaining: int


@dataclass(frozen=True)
class DpConfig:
    """
    One operating point of the mechanism.

    ``epsilon`` is the per-coordinate (raw) or per-pixel (image) budget.
    ``sensitivity`` is a scalar for raw gaze and one value per channel for
    images.
    """

    epsilon: float
    sensitivity: float | tuple[float, ...]
    repetitions: int = DEFAULT_REPETITIONS
    composition_multiplier: int = 1

    def __post_init__(self) -> None:
        if not math.isfinite(self.epsilon) or self.epsilon <= 0:
            raise InvalidScale(f"epsilon must be finite and > 0, got {self.epsilon}")
        sens = np.atleast_1d(np.asarray(self.sensitivity, dtype=np.float64))
        if not np.all(np.isfinite(sens)) or np.any(sens < 0):
            raise InvalidScale(f"sensitivity must be finite and >= 0, got {sens}")
        if self.repetitions < 1 or self.composition_multiplier < 1:
            raise ValueError("repetitions and composition_multiplier must be >= 1")

    @property
    def scale(self) -> np.ndarray:
        """Laplace scale per sensitivity entry."""
        sensitivity = np.atleast_1d(np.asarray(self.sensitivity, dtype=np.float64))
        return sensitivity / self.epsilon

    @property
    def effective_epsilon(self) -> float:
        return round(self.epsilon * self.composition_multiplier, 10)


@dataclass(frozen=True)
class EpsilonSweep:
    lo: float
    hi: float
    step: float
    domain: Domain

    def __post_init__(self) -> None:
        if self.domain not in ("raw", "image"):
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.step <= 0 or self.lo <= 0 or self.hi < self.lo:
            raise ValueError("sweep needs 0 < lo <= hi and step > 0")

    @classmethod
    def for_domain(cls, domain: Domain) -> "EpsilonSweep":
        if domain == "image":
            return cls(0.01, 15.0, 0.01, "image")
        return cls(10.0, 500.0, 0.01, "raw")

    def values(self) -> np.ndarray:
        n = int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1
        return np.round(self.lo + self.step * np.arange(n), 10)


def resample(path: Scanpath, length: int) -> np.ndarray:
    """Linear resampling of the (x, y) sequence to ``length`` points."""
    xy = path.points[:, 1:]
    if len(path) == 1:
        return np.repeat(xy, length, axis=0)
    src = np.linspace(0.0, 1.0, len(path))
    dst = np.linspace(0.0, 1.0, length)
    return np.column_stack(
        [np.interp(dst, src, xy[:, 0]), np.interp(dst, src, xy[:, 1])]
    )


def l1_sensitivity_raw(paths: Sequence[Scanpath], length: int | None = None) -> float:
    """
    Largest Manhattan distance between two recordings.

    Recordings are resampled to ``length`` points (default: the median point
    count) before comparing.
    """
    if len(paths) < 2:
        raise InsufficientData("raw sensitivity needs at least 2 recordings")
    if length is None:
        length = max(1, int(round(float(np.median([len(p) for p in paths])))))
    aligned = np.stack([resample(p, length).ravel() for p in paths])
    return float(pdist(aligned, metric="cityblock").max())


def l1_sensitivity_image(images: np.ndarray) -> tuple[float, ...]:
    """Per channel, the largest difference any pixel shows across the images."""
    arr = np.asarray(images, dtype=np.float64)
    if arr.ndim != 4 or arr.shape[0] < 2:
        raise InsufficientData("image sensitivity needs at least 2 images")
    spread = arr.max(axis=0) - arr.min(axis=0)
    return tuple(float(v) for v in spread.reshape(-1, arr.shape[-1]).max(axis=0))


def laplace_noise(
    n: int | tuple[int, ...], scale: float, rng: np.random.Generator
) -> np.ndarray:
    """I.i.d. Laplace(0, scale) samples."""
    if not math.isfinite(scale) or scale <= 0:
        raise InvalidScale(f"Laplace scale must be finite and > 0, got {scale}")
    return rng.laplace(0.0, scale, size=n)


def dp_raw(
    path: Scanpath, cfg: DpConfig, rng: np.random.Generator
) -> Scanpath | Skipped:
    """Noise x and y of every point; drop points that leave the stimulus."""
    scale = float(cfg.scale[0])
    points = path.points.copy()
    if scale > 0:
        points[:, 1:] += laplace_noise(points[:, 1:].shape, scale, rng)
    inside = np.all((points[:, 1:] >= 0.0) & (points[:, 1:] <= 1.0), axis=1)
    if inside.sum() < MIN_SURVIVING_POINTS:
        return Skipped(int(inside.sum()))
    return path.with_points(points[inside])


def dp_image(image: np.ndarray, cfg: DpConfig, rng: np.random.Generator) -> np.ndarray:
    """Per-pixel, per-channel Laplace noise, clamped to ``[0, 1]``."""
    img = np.asarray(image, dtype=np.float32)
    scale = cfg.scale
    if scale.shape[0] not in (1, img.shape[-1]):
        raise ValueError("image sensitivity needs one value per channel")
    noise = rng.laplace(0.0, 1.0, size=img.shape) * scale
    return np.clip(img + noise, 0.0, 1.0).astype(np.float32)


def majority_vote(predictions: np.ndarray, n_classes: int) -> int:
    """Most frequent class; ties go to the lowest class index."""
    counts = np.bincount(np.asarray(predictions, dtype=np.int64), minlength=n_classes)
    return int(np.argmax(counts))


def _vote(
    images: np.ndarray, classifiers: Mapping[str, ClassifierModel]
) -> dict[str, int]:
    return {
        task: majority_vote(classify(model, images).argmax(axis=1), model.n_classes)
        for task, model in classifiers.items()
    }


def dp_evaluate(
    epsilons: Sequence[float] | EpsilonSweep,
    data: Sequence[LabeledRecord] | ImageSet,
    classifiers: Mapping[str, ClassifierModel],
    sensitivity: float | tuple[float, ...],
    seed: int,
    domain: Domain | None = None,
    repetitions: int = DEFAULT_REPETITIONS,
    encoding: EncodingParams | None = None,
    workers: int | None = 1,
) -> pd.DataFrame:
    """
    Accuracy frontier of the mechanism.

    For every epsilon, every test item is noised ``repetitions`` times, each
    copy is classified and the item's prediction is the majority vote.
    Raw-domain copies are encoded before classification; copies skipped by
    :func:`dp_raw` do not vote and an item with no votes counts as skipped.

    Args:
        epsilons: Per-coordinate / per-pixel budgets, or a sweep.
        data: Labeled test recordings (raw) or test images (image).
        classifiers: ``{"stimulus": ..., "subject": ...}``.
        sensitivity: From :func:`l1_sensitivity_raw` / :func:`l1_sensitivity_image`.
        seed: Root seed; each (epsilon, item) pair derives its own stream.

    Returns:
        DataFrame with :data:`FRONTIER_COLUMNS`; ``epsilon`` is the effective
        (composed) budget. Accuracies are NaN when every item was skipped.
    """
    if isinstance(epsilons, EpsilonSweep):
        domain = epsilons.domain
        values = epsilons.values()
    else:
        values = np.asarray(epsilons, dtype=np.float64)
    if domain is None:
        domain = "image" if isinstance(data, ImageSet) else "raw"
    encoding = encoding or EncodingParams()

    if domain == "image":
        if not isinstance(data, ImageSet):
            raise TypeError("image-domain evaluation needs an ImageSet")
        multiplier = int(data.images.shape[1] * data.images.shape[2])
        n_items = len(data)
        truth = {t: data.labels(t) for t in classifiers}
    else:
        multiplier = 1
        n_items = len(data)
        truth = {t: np.array([r.label(t) for r in data]) for t in classifiers}

    rows = []
    for eps in values:
        cfg = DpConfig(float(eps), sensitivity, repetitions, multiplier)

        def run_item(i: int) -> dict[str, int] | None:
            rng = make_rng(seed, "dp", domain, float(eps), i)
            if domain == "image":
                base = data.images[i]
                copies = np.stack(
                    [dp_image(base, cfg, rng) for _ in range(repetitions)]
                )
            else:
                noised = [
                    dp_raw(data[i].scanpath, cfg, rng) for _ in range(repetitions)
                ]
                kept = [p for p in noised if not isinstance(p, Skipped)]
                if not kept:
                    return None
                copies = np.stack([encode_scanpath(p, params=encoding) for p in kept])
            return _vote(copies, classifiers)

        votes = parallel_map(run_item, list(range(n_items)), workers=workers)
        used = [i for i, v in enumerate(votes) if v is not None]
        skipped_fraction = 1.0 - len(used) / n_items if n_items else 1.0
        acc = {}
        for task in ("stimulus", "subject"):
            if task not in classifiers or not used:
                acc[task] = math.nan
            else:
                hits = [votes[i][task] == truth[task][i] for i in used]
                acc[task] = float(np.mean(hits))
        rows.append(
            {
                "epsilon": cfg.effective_epsilon,
                "domain": domain,
                "stim_acc": acc["stimulus"],
                "sub_acc": acc["subject"],
                "skipped_fraction": skipped_fraction,
            }
        )
        logger.info(
            "dp %s eps=%g: stim %.3f sub %.3f skipped %.2f",
            domain,
            cfg.effective_epsilon,
            acc["stimulus"],
            acc["subject"],
            skipped_fraction,
        )
    return pd.DataFrame(rows, columns=FRONTIER_COLUMNS)


def select_optimal_epsilon(
    frontier: pd.DataFrame, chance_level: float, tolerance: float = 0.03
) -> float:
    """
    The epsilon with the widest stimulus/subject accuracy gap among rows whose
    subject accuracy is within ``tolerance`` of chance. Ties keep the earlier
    row.

    Raises:
        NoFeasibleEpsilon: No row qualifies; ``nearest`` holds the row whose
            subject accuracy came closest to chance.
    """
    if frontier.empty:
        raise NoFeasibleEpsilon("empty frontier table")
    valid = frontier.dropna(subset=["stim_acc", "sub_acc"])
    distance = (valid["sub_acc"] - chance_level).abs()
    feasible = valid[distance <= tolerance + 1e-12]
    if feasible.empty:
        nearest = valid.loc[distance.idxmin()].to_dict() if not valid.empty else None
        raise NoFeasibleEpsilon(
            f"no epsilon puts subject accuracy within {tolerance} of chance "
            f"{chance_level:.4f}"
            + (
                f"; nearest: epsilon={nearest['epsilon']}"
                f" sub_acc={nearest['sub_acc']:.4f}"
                if nearest
                else ""
            ),
            nearest,
        )
    gap = feasible["stim_acc"] - feasible["sub_acc"]
    return float(feasible.loc[gap.idxmax(), "epsilon"])
