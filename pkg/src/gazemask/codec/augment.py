"""Scanpath-level data augmentation: crop, constant shift, coordinate noise."""

from dataclasses import dataclass
from typing import Sequence, TypeVar

import numpy as np

from gazemask.codec.scanpath import Scanpath

NOISE_LIMIT = 0.20
CROP_LOWER_LIMIT = 0.60
SHIFT_LIMIT = 0.30

_R = TypeVar("_R")


@dataclass(frozen=True)
class AugmentParams:
    """
    Ranges of the three augmentations.

    Defaults are the widest ranges allowed: noise up to 20% of the stimulus,
    crops keeping 60-100% of the points, shifts up to 30% of the stimulus.
    Setting ``noise_max=0``, ``shift_max_fraction=0`` and
    ``crop_min_fraction=1`` makes :func:`augment` the identity.
    """

    noise_max: float = NOISE_LIMIT
    crop_min_fraction: float = CROP_LOWER_LIMIT
    crop_max_fraction: float = 1.0
    shift_max_fraction: float = SHIFT_LIMIT
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.noise_max <= NOISE_LIMIT:
            raise ValueError(f"noise_max must be in [0, 0.2], got {self.noise_max}")
        if not (
            CROP_LOWER_LIMIT
            <= self.crop_min_fraction
            <= self.crop_max_fraction
            <= 1.0
        ):
            raise ValueError(
                "crop fractions must satisfy 0.6 <= min <= max <= 1.0, got "
                f"({self.crop_min_fraction}, {self.crop_max_fraction})"
            )
        if not 0.0 <= self.shift_max_fraction <= SHIFT_LIMIT:
            raise ValueError(
                f"shift_max_fraction must be in [0, 0.3], got {self.shift_max_fraction}"
            )

    def make_rng(self) -> np.random.Generator:
        """Generator for one augmentation pass, seeded by ``rng_seed``."""
        return np.random.default_rng(self.rng_seed)


def crop_window(n_points: int, fraction: float, start_draw: float) -> slice:
    """Contiguous window keeping ``round(fraction * n)`` points (at least one)."""
    length = max(1, min(n_points, int(np.floor(fraction * n_points + 0.5))))
    start = int(np.floor(start_draw * (n_points - length + 1)))
    start = min(start, n_points - length)
    return slice(start, start + length)


def augment(
    path: Scanpath, params: AugmentParams, rng: np.random.Generator
) -> Scanpath:
    """
    Return a randomly cropped, shifted and noised copy of ``path``.

    Draw order is fixed (crop length, crop start, shift, noise amplitude,
    per-point noise) so the same generator state always gives the same output.
    Timestamps and duration are kept; coordinates are clamped to ``[0, 1]``.
    """
    n = len(path)
    fraction = rng.uniform(params.crop_min_fraction, params.crop_max_fraction)
    window = crop_window(n, fraction, rng.random())
    points = path.points[window].copy()

    shift = rng.uniform(-params.shift_max_fraction, params.shift_max_fraction, 2)
    amplitude = rng.uniform(0.0, params.noise_max)
    noise = rng.uniform(-amplitude, amplitude, size=(points.shape[0], 2))

    points[:, 1:] = np.clip(points[:, 1:] + shift + noise, 0.0, 1.0)
    return path.with_points(points)


def expand_with_augmentations(
    items: Sequence[_R],
    paths: Sequence[Scanpath],
    params: AugmentParams,
    copies: int,
    rng: np.random.Generator,
) -> tuple[list[_R], list[Scanpath]]:
    """
    Build a training pool of every original plus ``copies`` augmented variants.

    ``items`` are carried alongside (labels, records) so callers can keep
    per-path metadata aligned with the returned scanpaths.
    """
    if len(items) != len(paths):
        raise ValueError("items and paths must have equal length")
    out_items: list[_R] = []
    out_paths: list[Scanpath] = []
    for item, path in zip(items, paths):
        out_items.append(item)
        out_paths.append(path)
        for _ in range(copies):
            out_items.append(item)
            out_paths.append(augment(path, params, rng))
    return out_items, out_paths
