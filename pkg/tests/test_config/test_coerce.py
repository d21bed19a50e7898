"""Tests for gazemask.config.coerce."""

import pytest

from gazemask.config import (
    ExperimentConfig,
    apply_overrides,
    coerce_value,
    parse_assignment,
    set_path,
)
from gazemask.config.coerce import _parse_bool
from gazemask.errors import ConfigError


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("true", True),
        ("TRUE", True),
        ("yes", True),
        ("1", True),
        ("on", True),
        ("false", False),
        ("no", False),
        ("0", False),
        ("off", False),
        (1, True),
        (0, False),
        (True, True),
    ],
)
def test_parse_bool(raw, expected):
    assert _parse_bool(raw) is expected


def test_parse_bool_invalid():
    with pytest.raises(ValueError):
        _parse_bool("maybe")


@pytest.mark.parametrize(
    "raw,annotation,expected",
    [
        ("5", int, 5),
        ("1_000", int, 1000),
        ("2e3", int, 2000),
        ("0.05", float, 0.05),
        ("abc", str, "abc"),
        ("none", int | None, None),
        ("", str | None, None),
        ("7", int | None, 7),
        ("image, raw", list[str], ["image", "raw"]),
        ("0.01,15,0.01", list[float], [0.01, 15.0, 0.01]),
        ("subject:who,x:px", dict[str, str], {"subject": "who", "x": "px"}),
    ],
)
def test_coerce_value(raw, annotation, expected):
    assert coerce_value(raw, annotation) == expected


def test_coerce_refuses_fractional_int():
    with pytest.raises(ValueError):
        coerce_value("2.5", int)


def test_coerce_refuses_bool_for_numbers():
    with pytest.raises(ValueError, match="bool"):
        coerce_value(True, int)


def test_coerce_rejects_bad_pairs():
    with pytest.raises(ValueError):
        coerce_value("subject", dict[str, str])


def test_parse_assignment():
    assert parse_assignment("agent.steps=10") == (["agent", "steps"], "10")
    assert parse_assignment("out=a=b") == (["out"], "a=b")
    with pytest.raises(ConfigError):
        parse_assignment("agent.steps")
    with pytest.raises(ConfigError):
        parse_assignment("=3")


def test_set_path_types_the_value():
    cfg = set_path(ExperimentConfig(), ["agent", "steps"], "12")
    assert cfg.agent.steps == 12
    cfg = set_path(cfg, ["seed"], "9")
    assert cfg.seed == 9
    cfg = set_path(cfg, ["report", "plots"], "off")
    assert cfg.report.plots is False


def test_set_path_errors():
    cfg = ExperimentConfig()
    with pytest.raises(ConfigError, match="did you mean 'steps'"):
        set_path(cfg, ["agent", "stpes"], "3")
    with pytest.raises(ConfigError, match="section"):
        set_path(cfg, ["agent"], "3")
    with pytest.raises(ConfigError, match="cannot coerce"):
        set_path(cfg, ["agent", "steps"], "many")
    with pytest.raises(ConfigError, match="not a section"):
        set_path(cfg, ["seed", "x"], "1")


def test_overrides_are_revalidated():
    with pytest.raises(ConfigError):
        apply_overrides(ExperimentConfig(), ["agent.iterations=0"])
    with pytest.raises(ConfigError):
        apply_overrides(ExperimentConfig(), ["dp.domains=image,pixels"])


def test_later_overrides_win():
    cfg = apply_overrides(ExperimentConfig(), ["agent.steps=3", "agent.steps=4"])
    assert cfg.agent.steps == 4
