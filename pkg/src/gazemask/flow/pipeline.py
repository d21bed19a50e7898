"""
Ordered stages with on-disk completion markers.

A finished stage writes ``<out>/stages/<name>.json`` holding its key, a JSON
summary and the sha256 of every artifact it produced. On the next run the
stage is skipped (its ``load`` hook restores the in-memory state) when the
marker's key matches and all listed artifacts still hash the same. The key
chains the stage's own config sections with the keys of the stages it runs
``after``, so changing an upstream section re-runs everything below it while
unrelated commands sharing an output directory reuse each other's stages.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

from gazemask.config import ExperimentConfig, config_hash, section_hash
from gazemask.errors import GazemaskError, StageFailed
from gazemask.flow.base import Workflow
from gazemask.utils import ensure_dir, sha256_bytes, sha256_file

logger = logging.getLogger(__name__)

STAGES_DIR = "stages"


@dataclass
class RunContext:
    """Shared state of one command: config, output directory, live objects."""

    config: ExperimentConfig
    out: Path
    state: dict[str, Any] = field(default_factory=dict)
    artifacts: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.out = Path(self.out)
        self.config_hash = config_hash(self.config)

    @property
    def seed(self) -> int:
        return self.config.seed

    def path(self, *parts: str) -> Path:
        """Path under the output directory (parent created)."""
        p = self.out.joinpath(*parts)
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def meta(self, **extra: Any) -> dict[str, Any]:
        """Metadata stamped into every container."""
        return {"config_hash": self.config_hash, "seed": self.seed, **extra}

    def produced(self, stage: str, path: Path) -> Path:
        self.artifacts.setdefault(stage, []).append(
            path.relative_to(self.out).as_posix()
        )
        return path


StageFn = Callable[[RunContext], Any]


@dataclass
class Stage:
    """
    One resumable step.

    ``run`` computes, writes its artifacts through ``ctx.produced`` and
    returns a JSON-serializable summary. ``load`` rebuilds the in-memory
    state from those artifacts when the stage is skipped; stages without a
    ``load`` hook always run.
    """

    name: str
    run: StageFn
    load: Callable[[RunContext, dict[str, Any]], None] | None = None
    depends: tuple[str, ...] = ()
    after: tuple[str, ...] = ()


class StagedPipeline(Workflow):
    """Run stages in order, skipping those whose markers are still valid."""

    def __init__(self, stages: Sequence[Stage], ctx: RunContext) -> None:
        if not stages:
            raise ValueError("pipeline must have at least one stage")
        self.stages = list(stages)
        self.ctx = ctx
        self.validate()

    def validate(self) -> bool:
        names: list[str] = []
        for stage in self.stages:
            if stage.name in names:
                raise ValueError(f"duplicate stage name {stage.name!r}")
            missing = [a for a in stage.after if a not in names]
            if missing:
                raise ValueError(
                    f"stage {stage.name!r} runs after {missing}, "
                    "which do not precede it"
                )
            names.append(stage.name)
        return True

    def _marker(self, stage: Stage) -> Path:
        return self.ctx.out / STAGES_DIR / f"{stage.name}.json"

    def _key(self, stage: Stage, keys: dict[str, str]) -> str:
        own = section_hash(self.ctx.config, stage.depends)
        upstream = ",".join(keys[a] for a in stage.after)
        return sha256_bytes(f"{stage.name}:{own}:{upstream}".encode("utf-8"))

    def _reusable(self, stage: Stage, key: str) -> dict[str, Any] | None:
        marker = self._marker(stage)
        if stage.load is None or not marker.exists():
            return None
        try:
            record = json.loads(marker.read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            return None
        if record.get("status") != "done" or record.get("key") != key:
            return None
        for rel, digest in record.get("artifacts", {}).items():
            path = self.ctx.out / rel
            if not path.exists() or sha256_file(path) != digest:
                logger.info(
                    "stage %s: artifact %s changed, re-running", stage.name, rel
                )
                return None
        return record

    def _write_marker(self, stage: Stage, record: dict[str, Any]) -> None:
        marker = ensure_dir(self.ctx.out / STAGES_DIR) / f"{stage.name}.json"
        text = json.dumps(record, indent=2, sort_keys=True)
        marker.write_text(text, encoding="utf-8")

    def run(self) -> dict[str, Any]:
        """
        Execute all stages.

        Returns:
            ``{stage name: summary}`` for every stage, run or reused.

        Raises:
            StageFailed: A stage raised; the failure is recorded in its marker.
        """
        summaries: dict[str, Any] = {}
        keys: dict[str, str] = {}
        for stage in self.stages:
            key = self._key(stage, keys)
            keys[stage.name] = key
            record = self._reusable(stage, key)
            if record is not None:
                logger.info("stage %s: up to date, loading", stage.name)
                try:
                    stage.load(self.ctx, record.get("summary") or {})
                except GazemaskError as exc:
                    raise StageFailed(stage.name, exc) from exc
                summaries[stage.name] = record.get("summary")
                continue

            logger.info("stage %s: running", stage.name)
            self.ctx.artifacts[stage.name] = []
            try:
                summary = stage.run(self.ctx)
            except StageFailed:
                raise
            except Exception as exc:
                self._write_marker(
                    stage,
                    {
                        "stage": stage.name,
                        "key": key,
                        "status": "failed",
                        "error": f"{type(exc).__name__}: {exc}",
                    },
                )
                logger.error("stage %s failed: %s", stage.name, exc)
                raise StageFailed(stage.name, exc) from exc
            artifacts = {
                rel: sha256_file(self.ctx.out / rel)
                for rel in self.ctx.artifacts[stage.name]
            }
            self._write_marker(
                stage,
                {
                    "stage": stage.name,
                    "key": key,
                    "status": "done",
                    "config_hash": self.ctx.config_hash,
                    "seed": self.ctx.seed,
                    "summary": summary,
                    "artifacts": artifacts,
                },
            )
            summaries[stage.name] = summary
            logger.info("stage %s: done", stage.name)
        return summaries
