"""Tests for gazemask.config.base."""

import pytest

from gazemask.config import (
    DataSection,
    ExperimentConfig,
    config_from_dict,
    config_hash,
    section_hash,
)
from gazemask.errors import ConfigError
from gazemask.models import AUTOENCODER_SCHEDULE, DQL_SCHEDULE


def test_defaults_reproduce_the_reference_setup():
    cfg = ExperimentConfig()
    assert cfg.encoding.resolution == 64
    assert cfg.agent.iterations == 20
    assert cfg.agent.keep == ["stimulus"] and cfg.agent.hide == ["subject"]
    schedules = cfg.schedules()
    assert schedules["autoencoder"] == AUTOENCODER_SCHEDULE
    assert schedules["dql"] == DQL_SCHEDULE


def test_schedule_overrides():
    cfg = config_from_dict({"autoencoder": {"batch_size": 4, "max_epochs": 2}})
    schedule = cfg.schedules()["autoencoder"]
    assert schedule.batch_size == 4 and schedule.max_epochs == 2
    assert schedule.initial_lr == AUTOENCODER_SCHEDULE.initial_lr
    bad = config_from_dict({"classifier": {"decay_factor": 2.0}})
    with pytest.raises(ConfigError, match="schedule"):
        bad.schedules()


def test_augment_params_carry_the_seed():
    cfg = config_from_dict({"augment": {"noise_max": 0.1}})
    params = cfg.augment.params(rng_seed=11)
    assert params.noise_max == 0.1 and params.rng_seed == 11
    assert cfg.augment.params().rng_seed == 0


def test_unknown_keys_suggest_a_fix():
    with pytest.raises(ConfigError, match="did you mean 'agent'"):
        config_from_dict({"agnet": {}})
    with pytest.raises(ConfigError, match="did you mean 'iterations'"):
        config_from_dict({"agent": {"iteratons": 3}})
    with pytest.raises(ConfigError, match="must be a table"):
        config_from_dict({"agent": 3})


@pytest.mark.parametrize(
    "data",
    [
        {"seed": -1},
        {"seed": True},
        {"threads": -2},
        {"data": {"out_of_range": "wrap"}},
        {"data": {"columns": {"pupil": "p"}}},
        {"data": {"n_subjects": 1}},
        {"encoding": {"resolution": 4}},
        {"augment": {"crop_min_fraction": 1.5}},
        {"agent": {"keep": ["subject"], "hide": ["subject"]}},
        {"agent": {"hide": ["age"]}},
        {"dp": {"domains": ["audio"]}},
        {"dp": {"image_sweep": [1.0, 0.5, 0.1]}},
        {"report": {"tau": 0}},
    ],
)
def test_invalid_values(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_data_schema():
    section = DataSection(columns={"subject": "who"}, stimulus_extent=[1920, 1080])
    schema = section.schema()
    assert schema.subject == "who"
    assert schema.stimulus_extent == (1920, 1080)


def test_hash_ignores_output_dir():
    a = ExperimentConfig(out="runs/a")
    b = ExperimentConfig(out="runs/b")
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(ExperimentConfig(seed=1))
    assert len(config_hash(a)) == 64


def test_section_hash_only_sees_named_sections():
    base = ExperimentConfig()
    changed = config_from_dict({"agent": {"steps": 5}})
    assert section_hash(base, ["data", "encoding"]) == section_hash(
        changed, ["data", "encoding"]
    )
    assert section_hash(base, ["agent"]) != section_hash(changed, ["agent"])
    assert section_hash(base, ["data"]) != section_hash(
        ExperimentConfig(seed=2), ["data"]
    )


def test_with_flags():
    cfg = ExperimentConfig().with_flags(
        seed=4, iterations=2, steps=None, out="x", threads=None, unknown=1
    )
    assert cfg.seed == 4 and cfg.out == "x"
    assert cfg.agent.iterations == 2
    assert cfg.agent.steps == ExperimentConfig().agent.steps


def test_section_hash_ignores_iteration_count():
    base = ExperimentConfig()
    longer = config_from_dict({"agent": {"iterations": 30}})
    assert section_hash(base, ["agent"]) == section_hash(longer, ["agent"])
    assert config_hash(base) != config_hash(longer)
