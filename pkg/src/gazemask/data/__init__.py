"""Labeled gaze datasets: CSV ingestion, balanced splits, synthetic data."""

from gazemask.data.csv_io import (
    ColumnSchema,
    DataWarning,
    RowError,
    SchemaError,
    load_gaze_csv,
    write_gaze_csv,
)
from gazemask.data.records import (
    TASKS,
    DatasetSplit,
    ImageSet,
    LabeledRecord,
    LabelSpace,
    ProvenanceError,
    chance_level,
    encode_records,
)
from gazemask.data.split import SplitWarning, split_fifty_fifty
from gazemask.data.synth import synth_generate

__all__ = [
    "TASKS",
    "ColumnSchema",
    "DataWarning",
    "DatasetSplit",
    "ImageSet",
    "LabelSpace",
    "LabeledRecord",
    "ProvenanceError",
    "RowError",
    "SchemaError",
    "SplitWarning",
    "chance_level",
    "encode_records",
    "load_gaze_csv",
    "split_fifty_fifty",
    "synth_generate",
    "write_gaze_csv",
]
