"""gazemask -- learned manipulation of gaze scanpath images for privacy.

Public API:

- :class:`ExperimentConfig`, :func:`load_config` -- configuration.
- :func:`run_experiment` -- one-liner mirror of ``gazemask run``.
- Subpackages: :mod:`gazemask.codec`, :mod:`gazemask.data`,
  :mod:`gazemask.models`, :mod:`gazemask.agents`, :mod:`gazemask.baselines`,
  :mod:`gazemask.analysis`, :mod:`gazemask.flow`.
"""

__version__ = "0.1.0"

from gazemask.config import ExperimentConfig, config_hash, load_config
from gazemask.errors import (
    ConfigError,
    DataError,
    GazemaskError,
    IntegrityError,
    StageFailed,
    TrainingDiverged,
    TrainingError,
)
from gazemask.main import resolve_config, run_experiment

__all__ = [
    "__version__",
    "ConfigError",
    "DataError",
    "ExperimentConfig",
    "GazemaskError",
    "IntegrityError",
    "StageFailed",
    "TrainingDiverged",
    "TrainingError",
    "config_hash",
    "load_config",
    "resolve_config",
    "run_experiment",
]
