"""Rewards: keep some classifiers confident, make others lose the true class."""

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from gazemask.agents.actions import apply_mask
from gazemask.data.records import TASKS
from gazemask.errors import ConfigError
from gazemask.flow.parallel import parallel_map
from gazemask.models.architectures import AutoencoderModel, ClassifierModel
from gazemask.models.training import decode, encode, true_class_probs

REWARD_BATCH = 256


class InvalidRewardSpec(ConfigError, ValueError):
    """Raised for empty or overlapping keep/hide target sets."""


@dataclass(frozen=True)
class RewardSpec:
    """Task names whose classifiers must stay accurate (keep) or fail (hide)."""

    keep: tuple[str, ...] = ("stimulus",)
    hide: tuple[str, ...] = ("subject",)

    def __post_init__(self) -> None:
        object.__setattr__(self, "keep", tuple(self.keep))
        object.__setattr__(self, "hide", tuple(self.hide))
        if not self.keep or not self.hide:
            raise InvalidRewardSpec("keep and hide targets must both be non-empty")
        overlap = set(self.keep) & set(self.hide)
        if overlap:
            raise InvalidRewardSpec(f"targets both kept and hidden: {sorted(overlap)}")
        unknown = (set(self.keep) | set(self.hide)) - set(TASKS)
        if unknown:
            raise InvalidRewardSpec(
                f"unknown task(s) {sorted(unknown)} (valid: {TASKS})"
            )

    @property
    def tasks(self) -> tuple[str, ...]:
        return self.keep + self.hide


def compute_reward(
    spec: RewardSpec,
    keep_probs: Sequence[float] | np.ndarray,
    hide_probs: Sequence[float] | np.ndarray,
) -> float | np.ndarray:
    """
    Mean true-class probability of the keep targets minus that of the hide
    targets.

    Inputs hold one value per target, or one row per target with a column per
    sample (the result is then one reward per sample).
    """
    keep = np.asarray(keep_probs, dtype=np.float64)
    hide = np.asarray(hide_probs, dtype=np.float64)
    if keep.shape[:1] == (0,) or hide.shape[:1] == (0,):
        raise InvalidRewardSpec("keep and hide probabilities must be non-empty")
    if keep.shape[0] != len(spec.keep) or hide.shape[0] != len(spec.hide):
        raise InvalidRewardSpec(
            f"expected {len(spec.keep)} keep and {len(spec.hide)} hide values"
        )
    for probs in (keep, hide):
        if not np.all(np.isfinite(probs)) or probs.min() < 0.0 or probs.max() > 1.0:
            raise ValueError("probabilities must lie in [0, 1]")
    reward = np.clip(keep.mean(axis=0) - hide.mean(axis=0), -1.0, 1.0)
    return float(reward) if reward.ndim == 0 else reward


class RewardEvaluator:
    """
    Scores masks with frozen classifiers.

    A masked bottleneck is decoded and every keep/hide classifier reports the
    probability of the image's true label. Chunks of masks are evaluated on
    up to ``workers`` threads; results keep mask order.
    """

    def __init__(
        self,
        autoencoder: AutoencoderModel,
        classifiers: Mapping[str, ClassifierModel],
        spec: RewardSpec,
        workers: int | None = 1,
    ) -> None:
        missing = [t for t in spec.tasks if t not in classifiers]
        if missing:
            raise InvalidRewardSpec(f"no classifier for task(s) {missing}")
        self.autoencoder = autoencoder
        self.classifiers = dict(classifiers)
        self.spec = spec
        self.workers = workers

    def score_images(
        self, images: np.ndarray, labels: Mapping[str, np.ndarray]
    ) -> np.ndarray:
        """Reward of already manipulated images (one per image)."""
        keep = [
            true_class_probs(self.classifiers[t], images, labels[t])
            for t in self.spec.keep
        ]
        hide = [
            true_class_probs(self.classifiers[t], images, labels[t])
            for t in self.spec.hide
        ]
        return np.atleast_1d(compute_reward(self.spec, keep, hide))

    def rewards(
        self, image: np.ndarray, labels: Mapping[str, int], masks: np.ndarray
    ) -> np.ndarray:
        """Reward of each mask applied to one image."""
        bottleneck = encode(self.autoencoder, image)
        masks = np.asarray(masks)
        chunks = [
            masks[start : start + REWARD_BATCH]
            for start in range(0, masks.shape[0], REWARD_BATCH)
        ]

        def score(chunk: np.ndarray) -> np.ndarray:
            decoded = decode(self.autoencoder, apply_mask(bottleneck, chunk))
            n = chunk.shape[0]
            return self.score_images(
                decoded, {t: np.full(n, labels[t]) for t in self.spec.tasks}
            )

        parts = parallel_map(score, chunks, workers=self.workers)
        return np.concatenate(parts) if parts else np.zeros(0)

    def rewards_per_image(
        self,
        images: np.ndarray,
        labels: Mapping[str, np.ndarray],
        masks: np.ndarray,
    ) -> np.ndarray:
        """Reward of ``masks[i]`` applied to ``images[i]``."""
        bottlenecks = apply_mask(encode(self.autoencoder, images), masks)
        return self.score_images(decode(self.autoencoder, bottlenecks), labels)
