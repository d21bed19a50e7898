"""Channel importance, accuracy tables, report files and plots."""

from gazemask.analysis.importance import (
    DEFAULT_TAU,
    ChannelImportance,
    aggregate_importance,
    changed_counts,
    channel_importance,
    importance_table,
)
from gazemask.analysis.plot import plot_accuracy, plot_importance
from gazemask.analysis.report import (
    ACCURACY_COLUMNS,
    TRANSFER_COLUMNS,
    accuracy_table,
    read_csv,
    read_jsonl,
    to_text,
    transfer_table,
    write_csv,
    write_jsonl,
)

__all__ = [
    "ACCURACY_COLUMNS",
    "DEFAULT_TAU",
    "TRANSFER_COLUMNS",
    "ChannelImportance",
    "accuracy_table",
    "aggregate_importance",
    "changed_counts",
    "channel_importance",
    "importance_table",
    "plot_accuracy",
    "plot_importance",
    "read_csv",
    "read_jsonl",
    "to_text",
    "transfer_table",
    "write_csv",
    "write_jsonl",
]
