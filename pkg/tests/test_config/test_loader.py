"""Tests for gazemask.config.loader."""

import pytest

from gazemask.config import (
    ExperimentConfig,
    config_hash,
    load_config,
    read_config_data,
    save_config,
)
from gazemask.errors import ConfigError


def test_no_path_gives_defaults():
    assert load_config(None) == ExperimentConfig()


def test_load_toml(make_config):
    p = make_config(
        "c.toml",
        """
        seed = 7
        [agent]
        iterations = 3
        steps = 200
        [dp]
        domains = ["image"]
        """,
    )
    cfg = load_config(p)
    assert cfg.seed == 7
    assert cfg.agent.iterations == 3 and cfg.agent.steps == 200
    assert cfg.dp.domains == ["image"]


def test_load_python_skips_helpers(make_config):
    p = make_config(
        "c.py",
        """
        import math

        _base = 100

        def _double(x):
            return 2 * x

        seed = 7
        agent = {"iterations": 3, "steps": _double(_base)}
        """,
    )
    cfg = load_config(p)
    assert cfg.seed == 7
    assert cfg.agent.steps == 200
    assert read_config_data(p) == {"seed": 7, "agent": {"iterations": 3, "steps": 200}}


def test_toml_and_python_agree(make_config):
    toml_cfg = load_config(make_config("a.toml", "seed = 3\n[agent]\nsteps = 9\n"))
    py_cfg = load_config(make_config("a.py", "seed = 3\nagent = {'steps': 9}\n"))
    assert config_hash(toml_cfg) == config_hash(py_cfg)


def test_unknown_key_in_file(make_config):
    p = make_config("c.toml", "[agent]\nstesp = 3\n")
    with pytest.raises(ConfigError, match="did you mean 'steps'"):
        load_config(p)


def test_broken_files(make_config, tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.toml")
    with pytest.raises(ConfigError, match="unsupported"):
        load_config(make_config("c.yaml", "seed: 1\n"))
    with pytest.raises(ConfigError):
        load_config(make_config("bad.toml", "seed = = 1\n"))
    with pytest.raises(ConfigError, match="ZeroDivisionError"):
        load_config(make_config("bad.py", "seed = 1 / 0\n"))


def test_save_then_load(tmp_path):
    cfg = ExperimentConfig(seed=5, out=str(tmp_path / "run"))
    path = save_config(cfg, tmp_path / "saved" / "config.toml")
    # None fields are left out of the file and come back as defaults
    assert "init_images" not in path.read_text()
    assert load_config(path) == cfg
