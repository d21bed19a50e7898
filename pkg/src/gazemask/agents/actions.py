"""Binary action masks over the autoencoder bottleneck."""

from typing import Iterator

import numpy as np

from gazemask.models.architectures import BOTTLENECK_SIZE, ShapeError

ACTION_THRESHOLD = 0.5
SWEEP_MAX_FLAGS = 100
SWEEP_PER_SIZE = 100


class InvalidQValues(ShapeError):
    """Raised for Q-value vectors holding NaN or infinity."""


def threshold_actions(q_values: np.ndarray) -> np.ndarray:
    """``uint8`` mask with a 1 wherever the value is at least 0.5.

    Works on one vector or a batch of vectors (last axis).
    """
    q = np.asarray(q_values)
    if not np.all(np.isfinite(q)):
        raise InvalidQValues("Q-values contain NaN or infinity")
    return (q >= ACTION_THRESHOLD).astype(np.uint8)


def apply_mask(bottleneck: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Zero the bottleneck values whose flag is set; batches broadcast."""
    b = np.asarray(bottleneck)
    m = np.asarray(mask)
    if b.shape[-1] != m.shape[-1]:
        raise ShapeError(
            f"mask length {m.shape[-1]} does not match bottleneck length {b.shape[-1]}"
        )
    return np.where(m.astype(bool), np.zeros((), dtype=b.dtype), b)


def random_mask(
    n_flags: int, rng: np.random.Generator, n_bits: int = BOTTLENECK_SIZE
) -> np.ndarray:
    """Mask with exactly ``n_flags`` distinct flags chosen uniformly."""
    mask = np.zeros(n_bits, dtype=np.uint8)
    mask[rng.choice(n_bits, size=n_flags, replace=False)] = 1
    return mask


def sweep_size(
    n_bits: int = BOTTLENECK_SIZE,
    max_flags: int = SWEEP_MAX_FLAGS,
    per_size: int = SWEEP_PER_SIZE,
) -> int:
    """Masks per image in :func:`sweep_masks`; 13,996 for the default sizes."""
    return n_bits + (max_flags - 1) * per_size


def sweep_masks(
    rng: np.random.Generator,
    n_bits: int = BOTTLENECK_SIZE,
    max_flags: int = SWEEP_MAX_FLAGS,
    per_size: int = SWEEP_PER_SIZE,
) -> Iterator[np.ndarray]:
    """
    Initialization masks for one image.

    First every single-flag mask in index order, then for each ``k`` in
    ``2..max_flags`` exactly ``per_size`` masks with ``k`` random flags.
    """
    for i in range(n_bits):
        mask = np.zeros(n_bits, dtype=np.uint8)
        mask[i] = 1
        yield mask
    for k in range(2, max_flags + 1):
        for _ in range(per_size):
            yield random_mask(k, rng, n_bits)
