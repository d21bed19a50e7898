"""Gaze CSV ingestion and export.

Expected layout (UTF-8, comma separated, header row)::

    subject,stimulus,trial,t,x,y[,extent_x,extent_y]

Column names are remapped with :class:`ColumnSchema`. Without a trial
column, a new trial starts whenever consecutive samples of one
``(subject, stimulus)`` pair are more than ``trial_gap`` seconds apart.
"""

import logging
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Literal, Sequence

import numpy as np
import pandas as pd

from gazemask.codec import Scanpath
from gazemask.data.records import LabeledRecord
from gazemask.errors import DataError

logger = logging.getLogger(__name__)

OutOfRange = Literal["clamp", "reject"]


class SchemaError(DataError):
    """Raised when required CSV columns are missing."""


class RowError(DataError):
    """Raised for an unparsable CSV row; ``line`` is 1-based incl. header."""

    def __init__(self, line: int, column: str, value: str) -> None:
        super().__init__(f"line {line}: cannot parse {column}={value!r}")
        self.line = line
        self.column = column
        self.value = value


class DataWarning(UserWarning):
    """Recoverable data issue (dropped samples, skipped trials)."""


@dataclass(frozen=True)
class ColumnSchema:
    """
    Mapping from logical fields to CSV column names.

    ``stimulus_extent`` divides raw coordinates when the file has no extent
    columns; leave it ``None`` for data that is already normalized.
    """

    subject: str = "subject"
    stimulus: str = "stimulus"
    trial: str = "trial"
    t: str = "t"
    x: str = "x"
    y: str = "y"
    extent_x: str = "extent_x"
    extent_y: str = "extent_y"
    stimulus_extent: tuple[float, float] | None = None

    @property
    def required(self) -> tuple[str, ...]:
        return (self.subject, self.stimulus, self.t, self.x, self.y)


def _numeric(df: pd.DataFrame, column: str) -> np.ndarray:
    raw = df[column].astype(str).str.strip()
    values = pd.to_numeric(raw, errors="coerce")
    bad = values.isna() | ~np.isfinite(values.to_numpy(dtype=np.float64))
    if bad.any():
        pos = int(np.flatnonzero(bad.to_numpy())[0])
        raise RowError(int(df.index[pos]) + 2, column, str(df[column].iloc[pos]))
    return values.to_numpy(dtype=np.float64)


def _segment_trials(frame: pd.DataFrame, trial_gap: float) -> pd.Series:
    """Assign gap-based trial ids inside each (subject, stimulus) pair."""
    ordered = frame.sort_values(["_subject", "_stimulus", "_t", "_x", "_y"])
    new_pair = (ordered["_subject"] != ordered["_subject"].shift()) | (
        ordered["_stimulus"] != ordered["_stimulus"].shift()
    )
    gap = ordered["_t"].diff() > trial_gap
    counter = (new_pair | gap).astype(np.int64)
    trial = counter.groupby([ordered["_subject"], ordered["_stimulus"]]).cumsum() - 1
    return trial.astype(str).reindex(frame.index)


def load_gaze_csv(
    source: str | Path | IO[bytes] | IO[str],
    schema: ColumnSchema | None = None,
    *,
    out_of_range: OutOfRange = "clamp",
    trial_gap: float = 1.0,
) -> list[LabeledRecord]:
    """
    Read a gaze CSV into one :class:`LabeledRecord` per trial.

    Args:
        source: Path or open (binary or text) stream.
        schema: Column mapping; defaults to the canonical names.
        out_of_range: ``clamp`` off-stimulus samples into ``[0, 1]`` or
            ``reject`` (drop) them with a :class:`DataWarning`.
        trial_gap: Gap in seconds that starts a new trial when the file has
            no trial column.

    Returns:
        Records ordered by ``(subject, stimulus, trial)``; class indices follow
        the sorted subject / stimulus names.

    Raises:
        SchemaError: A required column is missing.
        RowError: A numeric field cannot be parsed.
    """
    schema = schema or ColumnSchema()
    if out_of_range not in ("clamp", "reject"):
        raise ValueError(
            f"out_of_range must be 'clamp' or 'reject', got {out_of_range!r}"
        )
    df = pd.read_csv(source, dtype=str, keep_default_na=False, encoding="utf-8")
    df.columns = [c.strip() for c in df.columns]
    missing = [c for c in schema.required if c not in df.columns]
    if missing:
        raise SchemaError(
            f"missing column(s) {missing}; found {list(df.columns)}"
        )

    frame = pd.DataFrame(
        {
            "_subject": df[schema.subject].astype(str).str.strip(),
            "_stimulus": df[schema.stimulus].astype(str).str.strip(),
            "_t": _numeric(df, schema.t),
            "_x": _numeric(df, schema.x),
            "_y": _numeric(df, schema.y),
        },
        index=df.index,
    )
    if schema.extent_x in df.columns and schema.extent_y in df.columns:
        ex = _numeric(df, schema.extent_x)
        ey = _numeric(df, schema.extent_y)
        if np.any(ex <= 0) or np.any(ey <= 0):
            pos = int(np.flatnonzero((ex <= 0) | (ey <= 0))[0])
            raise RowError(int(df.index[pos]) + 2, schema.extent_x, "non-positive")
        frame["_x"] /= ex
        frame["_y"] /= ey
    elif schema.stimulus_extent is not None:
        frame["_x"] /= schema.stimulus_extent[0]
        frame["_y"] /= schema.stimulus_extent[1]

    if schema.trial in df.columns:
        frame["_trial"] = df[schema.trial].astype(str).str.strip()
    else:
        frame["_trial"] = _segment_trials(frame, trial_gap)

    n_groups = frame.groupby(["_subject", "_stimulus", "_trial"]).ngroups
    off = (frame[["_x", "_y"]] < 0.0).any(axis=1) | (frame[["_x", "_y"]] > 1.0).any(
        axis=1
    )
    if out_of_range == "clamp":
        frame[["_x", "_y"]] = frame[["_x", "_y"]].clip(0.0, 1.0)
    elif off.any():
        warnings.warn(
            f"dropped {int(off.sum())} off-stimulus sample(s)",
            DataWarning,
            stacklevel=2,
        )
        frame = frame[~off]

    subjects = sorted(frame["_subject"].unique())
    stimuli = sorted(frame["_stimulus"].unique())
    subject_index = {s: i for i, s in enumerate(subjects)}
    stimulus_index = {s: i for i, s in enumerate(stimuli)}

    records: list[LabeledRecord] = []
    grouped = frame.groupby(["_subject", "_stimulus", "_trial"], sort=True)
    for (subject, stimulus, trial), group in grouped:
        group = group.sort_values(["_t", "_x", "_y"], kind="mergesort")
        points = group[["_t", "_x", "_y"]].to_numpy(dtype=np.float64)
        points[:, 0] -= points[0, 0]
        path = Scanpath(subject, stimulus, points, trial_id=str(trial))
        records.append(
            LabeledRecord(path, subject_index[subject], stimulus_index[stimulus])
        )

    skipped = n_groups - len(records)
    if skipped:
        warnings.warn(
            f"skipped {skipped} trial(s) with no valid samples",
            DataWarning,
            stacklevel=2,
        )
    logger.info(
        "loaded %d trial(s): %d subject(s), %d stimulus class(es)",
        len(records),
        len(subjects),
        len(stimuli),
    )
    return records


def write_gaze_csv(
    records: Sequence[LabeledRecord], dest: str | Path | IO[str]
) -> None:
    """Export records in the canonical layout accepted by :func:`load_gaze_csv`."""
    rows = []
    for rec in records:
        path = rec.scanpath
        for t, x, y in path.points:
            rows.append(
                (path.subject_id, path.stimulus_id, path.trial_id, t, x, y)
            )
    frame = pd.DataFrame(rows, columns=["subject", "stimulus", "trial", "t", "x", "y"])
    frame.to_csv(dest, index=False, float_format="%.10g")
