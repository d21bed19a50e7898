"""Raw gaze recordings: points and scanpaths."""

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from gazemask.errors import DataError


class InvalidScanpath(DataError, ValueError):
    """Raised when a scanpath violates its structural invariants."""


class GazePoint(NamedTuple):
    """One gaze sample: seconds since recording start and normalized position."""

    t: float
    x: float
    y: float


@dataclass(frozen=True, eq=False)
class Scanpath:
    """
    Time-ordered gaze points of one subject viewing one stimulus.

    Points are held as an ``(n, 3)`` float64 array with columns ``t, x, y``.
    ``duration`` defaults to the timestamp of the last point.

    Examples:
        >>> path = Scanpath.from_points("s01", "img1", [(0.0, 0.5, 0.5)], duration=1.0)
        >>> len(path)
        1
    """

    subject_id: str
    stimulus_id: str
    points: np.ndarray
    duration: float | None = None
    trial_id: str = field(default="0")

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise InvalidScanpath(
                f"points must have shape (n, 3), got {tuple(pts.shape)}"
            )
        if pts.shape[0] == 0:
            raise InvalidScanpath("scanpath has no points")
        if not np.all(np.isfinite(pts)):
            raise InvalidScanpath("scanpath contains non-finite values")
        t = pts[:, 0]
        if t[0] < 0:
            raise InvalidScanpath(f"negative timestamp {t[0]}")
        if np.any(np.diff(t) < 0):
            raise InvalidScanpath("timestamps are not non-decreasing")
        xy = pts[:, 1:]
        if np.any(xy < 0.0) or np.any(xy > 1.0):
            raise InvalidScanpath("coordinates must lie in [0, 1]")
        duration = float(t[-1]) if self.duration is None else float(self.duration)
        if duration < t[-1]:
            raise InvalidScanpath(
                f"duration {duration} is shorter than the last timestamp {t[-1]}"
            )
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "duration", duration)

    @classmethod
    def from_points(
        cls,
        subject_id: str,
        stimulus_id: str,
        points: Iterable[GazePoint | tuple[float, float, float]],
        duration: float | None = None,
        trial_id: str = "0",
    ) -> "Scanpath":
        arr = np.array([tuple(p) for p in points], dtype=np.float64).reshape(-1, 3)
        return cls(subject_id, stimulus_id, arr, duration, trial_id)

    def with_points(self, points: np.ndarray) -> "Scanpath":
        """Copy with replaced points, keeping labels and duration."""
        return Scanpath(
            self.subject_id, self.stimulus_id, points, self.duration, self.trial_id
        )

    @property
    def t(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 2]

    def gaze_points(self) -> list[GazePoint]:
        return [GazePoint(*map(float, row)) for row in self.points]

    def __len__(self) -> int:
        return int(self.points.shape[0])
