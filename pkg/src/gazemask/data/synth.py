"""
Synthetic gaze datasets with a controllable subject signature.

Every stimulus is a closed Lissajous curve. Every subject carries a fixed
spatial bias and a fixed time-warp exponent that reshapes dwell times along
the path. ``signature_strength`` mixes the subject signature in linearly;
at 0 all subjects draw from the same distribution.
"""

import numpy as np

from gazemask.codec import Scanpath
from gazemask.data.records import LabeledRecord

# (x frequency, y frequency) of the stimulus curves, cycled with a phase shift
CURVE_FREQUENCIES: tuple[tuple[int, int], ...] = (
    (1, 2),
    (2, 1),
    (3, 2),
    (2, 3),
    (1, 3),
    (3, 1),
    (3, 4),
    (4, 3),
)
CURVE_AMPLITUDE = 0.3
BIAS_LIMIT = 0.15
WARP_RANGE = (0.6, 1.6)
POINT_NOISE = 0.02


def _stimulus_curve(k: int, u: np.ndarray) -> np.ndarray:
    fx, fy = CURVE_FREQUENCIES[k % len(CURVE_FREQUENCIES)]
    phase = np.pi / 2 + np.pi / 7 * (k // len(CURVE_FREQUENCIES))
    x = 0.5 + CURVE_AMPLITUDE * np.sin(fx * u + phase)
    y = 0.5 + CURVE_AMPLITUDE * np.sin(fy * u)
    return np.stack([x, y], axis=1)


def synth_generate(
    n_subjects: int,
    n_stimuli: int,
    trials_per_pair: int,
    signature_strength: float,
    rng: np.random.Generator,
    n_points: int = 32,
    trial_duration: float = 8.0,
    curve_offset: int = 0,
) -> list[LabeledRecord]:
    """
    Generate ``n_subjects * n_stimuli * trials_per_pair`` labeled records.

    Stimulus ``k`` follows curve ``k + curve_offset``; a second dataset with a
    different offset shares the generator family but none of the curves.

    Subject signatures are drawn first, then trials in (subject, stimulus,
    trial) order, so one seed always yields the same records.
    """
    if n_subjects < 2 or n_stimuli < 2 or trials_per_pair < 2:
        raise ValueError(
            "n_subjects, n_stimuli and trials_per_pair must all be >= 2, got "
            f"({n_subjects}, {n_stimuli}, {trials_per_pair})"
        )
    if not 0.0 <= signature_strength <= 1.0:
        raise ValueError(
            f"signature_strength must be in [0, 1], got {signature_strength}"
        )
    if curve_offset < 0:
        raise ValueError(f"curve_offset must be >= 0, got {curve_offset}")
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")

    biases = rng.uniform(-BIAS_LIMIT, BIAS_LIMIT, size=(n_subjects, 2))
    warps = rng.uniform(*WARP_RANGE, size=n_subjects)

    progress = np.linspace(0.0, 1.0, n_points)
    records: list[LabeledRecord] = []
    for j in range(n_subjects):
        bias = signature_strength * biases[j]
        warp = 1.0 + signature_strength * (warps[j] - 1.0)
        t = trial_duration * progress**warp
        for k in range(n_stimuli):
            for trial in range(trials_per_pair):
                start = rng.uniform(0.0, 2 * np.pi)
                xy = _stimulus_curve(k + curve_offset, start + 2 * np.pi * progress)
                xy = xy + bias + rng.normal(0.0, POINT_NOISE, size=xy.shape)
                points = np.column_stack([t, np.clip(xy, 0.0, 1.0)])
                path = Scanpath(
                    f"subject{j:02d}",
                    f"stimulus{k:02d}",
                    points,
                    duration=trial_duration,
                    trial_id=str(trial),
                )
                records.append(LabeledRecord(path, j, k))
    return records
