"""Loader for experiment config files (bare Python or TOML)."""

import importlib.util
import logging
import sys
from pathlib import Path
from types import ModuleType
from typing import Any, Iterable

import toml

from gazemask.config.base import ExperimentConfig, config_from_dict
from gazemask.config.coerce import parse_assignment, set_path
from gazemask.errors import ConfigError

logger = logging.getLogger(__name__)


def _exec_config_module(config_path: Path) -> ModuleType:
    """Load a config file as an importable module."""
    module_name = f"_gazemask_config_{config_path.stem}_{abs(hash(str(config_path)))}"
    spec = importlib.util.spec_from_file_location(module_name, config_path)
    if spec is None or spec.loader is None:
        raise ConfigError(f"Cannot load config from {config_path}")
    module = importlib.util.module_from_spec(spec)
    sys.modules[module_name] = module
    try:
        spec.loader.exec_module(module)
    except Exception as exc:
        raise ConfigError(f"{config_path}: {type(exc).__name__}: {exc}") from exc
    finally:
        sys.modules.pop(module_name, None)
    return module


def _filter_globals(namespace: dict[str, Any]) -> dict[str, Any]:
    """
    Top-level data of a bare config file.

    Skips names starting with ``_``, modules, and every callable or class:
    a config file holds section tables and scalars, helpers stay private.
    """
    out: dict[str, Any] = {}
    for name, value in namespace.items():
        if name.startswith("_"):
            continue
        if isinstance(value, ModuleType):
            continue
        if isinstance(value, type) or callable(value):
            continue
        out[name] = value
    return out


def read_config_data(config_path: str | Path) -> dict[str, Any]:
    """Raw nested data of a ``.py`` or ``.toml`` config file."""
    path = Path(config_path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    if path.suffix == ".toml":
        try:
            return toml.load(path)
        except toml.TomlDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if path.suffix == ".py":
        return _filter_globals(vars(_exec_config_module(path)))
    raise ConfigError(f"unsupported config format {path.suffix!r} (use .py or .toml)")


def load_config(config_path: str | Path | None = None) -> ExperimentConfig:
    """
    Load a config file; ``None`` gives the default configuration.

    Examples:
        A TOML file::

            seed = 7
            [agent]
            iterations = 3
            steps = 200

        The same as a bare Python file::

            seed = 7
            agent = {"iterations": 3, "steps": 200}
    """
    if config_path is None:
        return ExperimentConfig()
    data = read_config_data(config_path)
    logger.debug("loaded config %s: %s", config_path, sorted(data))
    return config_from_dict(data)


def apply_overrides(
    config: ExperimentConfig, assignments: Iterable[str]
) -> ExperimentConfig:
    """Apply ``section.key=value`` strings in order; later ones win."""
    for text in assignments:
        path, raw = parse_assignment(text)
        config = set_path(config, path, raw)
        logger.debug("override %s", text)
    return config


def save_config(config: ExperimentConfig, dest: str | Path) -> Path:
    """Write the resolved config as TOML (``None`` fields are omitted)."""

    def strip_none(value: Any) -> Any:
        if isinstance(value, dict):
            return {k: strip_none(v) for k, v in value.items() if v is not None}
        return value

    dest = Path(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    dest.write_text(toml.dumps(strip_none(config.to_dict())), encoding="utf-8")
    return dest
