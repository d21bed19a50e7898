"""High-level Python API for gazemask."""

from pathlib import Path
from typing import Any, Iterable

from gazemask.config import ExperimentConfig, apply_overrides, load_config
from gazemask.flow.experiment import run_experiment as _run_experiment

__all__ = ["resolve_config", "run_experiment"]


def resolve_config(
    config: ExperimentConfig | str | Path | None = None,
    set_overrides: Iterable[str] = (),
    **flags: Any,
) -> ExperimentConfig:
    """
    Config from an object, a file or the defaults, then ``--set`` style
    overrides, then flags (``seed``, ``iterations``, ``steps``, ``out``,
    ``threads``). Later sources win.
    """
    if not isinstance(config, ExperimentConfig):
        config = load_config(config)
    config = apply_overrides(config, set_overrides)
    return config.with_flags(**flags)


def run_experiment(
    config: ExperimentConfig | str | Path | None = None,
    set_overrides: Iterable[str] = (),
    **flags: Any,
) -> dict[str, Any]:
    """
    Convenience runner that mirrors ``gazemask run`` on the command line.

    Examples:
        >>> run_experiment("exp.toml", iterations=2, out="runs/smoke")
    """
    return _run_experiment(resolve_config(config, set_overrides, **flags))
