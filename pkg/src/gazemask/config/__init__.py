"""Configuration system for gazemask."""

from gazemask.config.base import (
    SECTIONS,
    AgentSection,
    AugmentSection,
    DataSection,
    DpSection,
    EncodingSection,
    ExperimentConfig,
    GanSection,
    ReportSection,
    ScheduleSection,
    TransferSection,
    config_from_dict,
    config_hash,
    section_hash,
)
from gazemask.config.coerce import coerce_value, parse_assignment, set_path
from gazemask.config.loader import (
    apply_overrides,
    load_config,
    read_config_data,
    save_config,
)

__all__ = [
    "SECTIONS",
    "AgentSection",
    "AugmentSection",
    "DataSection",
    "DpSection",
    "EncodingSection",
    "ExperimentConfig",
    "GanSection",
    "ReportSection",
    "ScheduleSection",
    "TransferSection",
    "apply_overrides",
    "coerce_value",
    "config_from_dict",
    "config_hash",
    "load_config",
    "parse_assignment",
    "read_config_data",
    "save_config",
    "section_hash",
    "set_path",
]
