"""Which image channels a manipulation touches."""

from dataclasses import dataclass
from typing import Mapping

import numpy as np
import pandas as pd

from gazemask.models.architectures import ShapeError

DEFAULT_TAU = 1.0 / 255.0
CHANNELS = ("red", "green", "blue")


@dataclass(frozen=True)
class ChannelImportance:
    """Share of changed values per channel, in percent.

    ``degenerate`` marks a comparison where nothing changed (all zeros).
    """

    red_pct: float
    green_pct: float
    blue_pct: float
    degenerate: bool = False

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.red_pct, self.green_pct, self.blue_pct)


def changed_counts(
    before: np.ndarray, after: np.ndarray, tau: float = DEFAULT_TAU
) -> np.ndarray:
    """Number of values per channel whose change exceeds ``tau``."""
    b = np.asarray(before, dtype=np.float64)
    a = np.asarray(after, dtype=np.float64)
    if b.shape != a.shape:
        raise ShapeError(f"image shapes differ: {b.shape} vs {a.shape}")
    if b.shape[-1] != 3:
        raise ShapeError(f"expected 3 channels, got shape {b.shape}")
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    changed = np.abs(a - b) > tau
    return changed.reshape(-1, 3).sum(axis=0)


def _from_counts(counts: np.ndarray) -> ChannelImportance:
    total = counts.sum()
    if total == 0:
        return ChannelImportance(0.0, 0.0, 0.0, degenerate=True)
    pct = counts / total * 100.0
    return ChannelImportance(float(pct[0]), float(pct[1]), float(pct[2]))


def channel_importance(
    before: np.ndarray, after: np.ndarray, tau: float = DEFAULT_TAU
) -> ChannelImportance:
    return _from_counts(changed_counts(before, after, tau))


def aggregate_importance(
    befores: np.ndarray, afters: np.ndarray, tau: float = DEFAULT_TAU
) -> ChannelImportance:
    """Importance over a whole image set (counts pooled before normalizing)."""
    return _from_counts(changed_counts(befores, afters, tau))


def importance_table(per_iteration: Mapping[int, ChannelImportance]) -> pd.DataFrame:
    rows = [
        {
            "iteration": it,
            "red_pct": imp.red_pct,
            "green_pct": imp.green_pct,
            "blue_pct": imp.blue_pct,
        }
        for it, imp in sorted(per_iteration.items())
    ]
    return pd.DataFrame(rows, columns=["iteration", "red_pct", "green_pct", "blue_pct"])
