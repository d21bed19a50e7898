"""Tests for gazemask.flow.pipeline."""

import json

import pytest

from gazemask.config import ExperimentConfig, apply_overrides
from gazemask.errors import DataError, StageFailed
from gazemask.flow.pipeline import RunContext, Stage, StagedPipeline


class Recorder:
    """Stage callbacks that log which hooks ran."""

    def __init__(self) -> None:
        self.calls: list[str] = []

    def stage(self, name, depends=(), after=(), fail=False):
        def run(ctx):
            self.calls.append(f"run:{name}")
            if fail:
                raise DataError(f"{name} broke")
            path = ctx.produced(name, ctx.path(name, "out.txt"))
            path.write_text(f"{name}:{ctx.seed}", encoding="utf-8")
            return {"name": name}

        def load(ctx, summary):
            self.calls.append(f"load:{name}")
            assert summary == {"name": name}

        return Stage(name, run, load, depends=depends, after=after)


def _pipeline(rec, tmp_path, overrides=(), fail=False):
    cfg = apply_overrides(ExperimentConfig(), list(overrides))
    ctx = RunContext(cfg, tmp_path / "run")
    stages = [
        rec.stage("a", depends=("data",)),
        rec.stage("b", depends=("agent",), after=("a",), fail=fail),
        rec.stage("c", depends=("dp",)),
    ]
    return StagedPipeline(stages, ctx)


def test_first_run_writes_markers(tmp_path):
    rec = Recorder()
    summaries = _pipeline(rec, tmp_path).run()
    assert rec.calls == ["run:a", "run:b", "run:c"]
    assert summaries == {"a": {"name": "a"}, "b": {"name": "b"}, "c": {"name": "c"}}
    marker = json.loads((tmp_path / "run" / "stages" / "b.json").read_text())
    assert marker["status"] == "done"
    assert list(marker["artifacts"]) == ["b/out.txt"]


def test_second_run_loads_instead(tmp_path):
    _pipeline(Recorder(), tmp_path).run()
    rec = Recorder()
    _pipeline(rec, tmp_path).run()
    assert rec.calls == ["load:a", "load:b", "load:c"]


def test_upstream_change_reruns_downstream(tmp_path):
    _pipeline(Recorder(), tmp_path).run()
    rec = Recorder()
    _pipeline(rec, tmp_path, ["data.n_points=16"]).run()
    assert rec.calls == ["run:a", "run:b", "load:c"]


def test_own_section_change_reruns_only_that_stage(tmp_path):
    _pipeline(Recorder(), tmp_path).run()
    rec = Recorder()
    _pipeline(rec, tmp_path, ["agent.steps=5"]).run()
    assert rec.calls == ["load:a", "run:b", "load:c"]


def test_changed_artifact_reruns(tmp_path):
    _pipeline(Recorder(), tmp_path).run()
    (tmp_path / "run" / "a" / "out.txt").write_text("tampered")
    rec = Recorder()
    _pipeline(rec, tmp_path).run()
    # the rerun rewrites the same bytes, so downstream stays valid
    assert rec.calls == ["run:a", "load:b", "load:c"]


def test_failure_is_recorded(tmp_path):
    rec = Recorder()
    with pytest.raises(StageFailed) as exc_info:
        _pipeline(rec, tmp_path, fail=True).run()
    assert exc_info.value.stage == "b"
    assert exc_info.value.exit_code == DataError.exit_code
    assert rec.calls == ["run:a", "run:b"]
    marker = json.loads((tmp_path / "run" / "stages" / "b.json").read_text())
    assert marker["status"] == "failed"
    assert "b broke" in marker["error"]

    # a failed marker is never reused
    rec = Recorder()
    _pipeline(rec, tmp_path).run()
    assert rec.calls == ["load:a", "run:b", "run:c"]


def test_stages_without_load_always_run(tmp_path):
    calls = []
    ctx = RunContext(ExperimentConfig(), tmp_path)
    stage = Stage("always", lambda c: calls.append(1) or {})
    StagedPipeline([stage], ctx).run()
    StagedPipeline([stage], ctx).run()
    assert calls == [1, 1]


def _noop(ctx):
    return {}


def test_validation(tmp_path):
    ctx = RunContext(ExperimentConfig(), tmp_path)
    with pytest.raises(ValueError, match="at least one"):
        StagedPipeline([], ctx)
    with pytest.raises(ValueError, match="duplicate"):
        StagedPipeline([Stage("x", _noop), Stage("x", _noop)], ctx)
    with pytest.raises(ValueError, match="precede"):
        StagedPipeline([Stage("x", _noop, after=("y",)), Stage("y", _noop)], ctx)


def test_context_helpers(tmp_path):
    ctx = RunContext(ExperimentConfig(seed=4), tmp_path / "out")
    path = ctx.path("models", "m.gzm")
    assert path.parent.is_dir()
    assert ctx.meta(task="subject") == {
        "config_hash": ctx.config_hash,
        "seed": 4,
        "task": "subject",
    }
