"""Experiment configuration: one dataclass per section plus the root config."""

import difflib
import json
from dataclasses import asdict, dataclass, field, fields, is_dataclass, replace
from typing import Any, Mapping, Sequence

from gazemask.agents import AgentParams, RewardSpec
from gazemask.baselines import EpsilonSweep, GanParams
from gazemask.codec import AugmentParams, EncodingParams
from gazemask.data import ColumnSchema
from gazemask.data.records import TASKS
from gazemask.errors import ConfigError
from gazemask.models import (
    AUTOENCODER_SCHEDULE,
    CLASSIFIER_SCHEDULE,
    DQL_SCHEDULE,
    TRANSFER_SCHEDULE,
    TrainingSchedule,
)
from gazemask.utils import sha256_bytes

_SCHEMA_FIELDS = frozenset(
    f.name for f in fields(ColumnSchema) if f.name != "stimulus_extent"
)


def _fail(section: str, message: str) -> None:
    raise ConfigError(f"[{section}] {message}")


@dataclass
class DataSection:
    """
    Where the recordings come from.

    With ``source`` unset a synthetic dataset is generated from the
    ``n_*`` / ``signature_strength`` fields.
    """

    source: str | None = None
    columns: dict[str, str] = field(default_factory=dict)
    stimulus_extent: list[float] | None = None
    out_of_range: str = "clamp"
    trial_gap: float = 1.0
    n_subjects: int = 8
    n_stimuli: int = 4
    trials_per_pair: int = 20
    signature_strength: float = 1.0
    n_points: int = 32
    curve_offset: int = 0

    def __post_init__(self) -> None:
        unknown = set(self.columns) - _SCHEMA_FIELDS
        if unknown:
            _fail("data", f"unknown column roles {sorted(unknown)}")
        if self.out_of_range not in ("clamp", "reject"):
            _fail(
                "data",
                f"out_of_range must be clamp or reject, got {self.out_of_range!r}",
            )
        if self.stimulus_extent is not None and len(self.stimulus_extent) != 2:
            _fail("data", "stimulus_extent needs two values (width, height)")
        if self.trial_gap <= 0:
            _fail("data", f"trial_gap must be > 0, got {self.trial_gap}")
        if min(self.n_subjects, self.n_stimuli, self.trials_per_pair) < 2:
            _fail("data", "n_subjects, n_stimuli and trials_per_pair must be >= 2")
        if not 0.0 <= self.signature_strength <= 1.0:
            _fail("data", "signature_strength must be in [0, 1]")

    def schema(self) -> ColumnSchema:
        extent = tuple(self.stimulus_extent) if self.stimulus_extent else None
        return ColumnSchema(**self.columns, stimulus_extent=extent)


@dataclass
class AugmentSection:
    enabled: bool = True
    copies: int = 4
    noise_max: float = 0.2
    crop_min_fraction: float = 0.6
    crop_max_fraction: float = 1.0
    shift_max_fraction: float = 0.3
    during_adaptation: bool = True

    def __post_init__(self) -> None:
        if self.copies < 0:
            _fail("augment", f"copies must be >= 0, got {self.copies}")
        try:
            self.params()
        except ValueError as exc:
            raise ConfigError(f"[augment] {exc}") from exc

    def params(self, rng_seed: int = 0) -> AugmentParams:
        return AugmentParams(
            self.noise_max,
            self.crop_min_fraction,
            self.crop_max_fraction,
            self.shift_max_fraction,
            rng_seed,
        )


@dataclass
class EncodingSection:
    resolution: int = 64
    g_floor: float = 0.1
    dot_radius: int = 1

    def __post_init__(self) -> None:
        try:
            self.params()
        except ValueError as exc:
            raise ConfigError(f"[encoding] {exc}") from exc

    def params(self) -> EncodingParams:
        return EncodingParams(self.resolution, self.g_floor, self.dot_radius)


@dataclass
class ScheduleSection:
    """Overrides of a training schedule; unset fields keep the model default."""

    initial_lr: float | None = None
    decay_every: int | None = None
    decay_factor: float | None = None
    stop_lr: float | None = None
    weight_decay: float | None = None
    momentum: float | None = None
    batch_size: int | None = None
    max_epochs: int | None = None

    def overrides(self) -> dict[str, Any]:
        return {
            f.name: getattr(self, f.name)
            for f in fields(ScheduleSection)
            if getattr(self, f.name) is not None
        }

    def resolve(self, base: TrainingSchedule) -> TrainingSchedule:
        try:
            return base.with_overrides(**self.overrides())
        except ValueError as exc:
            raise ConfigError(f"invalid schedule override: {exc}") from exc


@dataclass
class TransferSection(ScheduleSection):
    """Second dataset for the transfer experiment and its classifier schedule."""

    source: str | None = None
    curve_offset: int = 4
    run: str | None = None


@dataclass
class AgentSection:
    iterations: int = 20
    steps: int = 1000
    images_per_run: int = 10
    tolerance: float = 0.005
    window: int = 50
    sync_every: int = 10
    capacity: int = 200_000
    init_images: int | None = None
    max_batches_per_epoch: int | None = None
    keep: list[str] = field(default_factory=lambda: ["stimulus"])
    hide: list[str] = field(default_factory=lambda: ["subject"])
    gamma_start: float = 0.9
    gamma_end: float = 0.1
    epsilon_start: float = 0.5
    epsilon_end: float = 0.05

    def __post_init__(self) -> None:
        if self.iterations < 1:
            _fail("agent", f"iterations must be >= 1, got {self.iterations}")
        if self.steps < 1 or self.images_per_run < 1 or self.sync_every < 1:
            _fail("agent", "steps, images_per_run and sync_every must be >= 1")
        try:
            self.params().discount()
            self.reward_spec()
        except ValueError as exc:
            raise ConfigError(f"[agent] {exc}") from exc

    def params(self) -> AgentParams:
        return AgentParams(
            steps=self.steps,
            images_per_run=self.images_per_run,
            tolerance=self.tolerance,
            window=self.window,
            sync_every=self.sync_every,
            capacity=self.capacity,
            init_images=self.init_images,
            max_batches_per_epoch=self.max_batches_per_epoch,
            gamma_start=self.gamma_start,
            gamma_end=self.gamma_end,
            epsilon_start=self.epsilon_start,
            epsilon_end=self.epsilon_end,
        )

    def reward_spec(self) -> RewardSpec:
        return RewardSpec(keep=tuple(self.keep), hide=tuple(self.hide))


@dataclass
class DpSection:
    domains: list[str] = field(default_factory=lambda: ["image", "raw"])
    image_sweep: list[float] = field(default_factory=lambda: [0.01, 15.0, 0.01])
    raw_sweep: list[float] = field(default_factory=lambda: [10.0, 500.0, 0.01])
    repetitions: int = 100
    tolerance: float = 0.03

    def __post_init__(self) -> None:
        bad = set(self.domains) - {"image", "raw"}
        if bad:
            _fail("dp", f"unknown domains {sorted(bad)}")
        if self.repetitions < 1:
            _fail("dp", f"repetitions must be >= 1, got {self.repetitions}")
        for domain in self.domains:
            try:
                self.sweep(domain)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"[dp] {domain}_sweep: {exc}") from exc

    def sweep(self, domain: str) -> EpsilonSweep:
        lo, hi, step = self.image_sweep if domain == "image" else self.raw_sweep
        return EpsilonSweep(float(lo), float(hi), float(step), domain)


@dataclass
class GanSection:
    enabled: bool = False
    pretrain_epochs: int = 100
    epochs: int = 100
    recon_weight: float = 1.0
    batch_size: int = 40

    def params(self, keep: str, hide: str) -> GanParams:
        return GanParams(
            self.pretrain_epochs,
            self.epochs,
            self.recon_weight,
            keep,
            hide,
            self.batch_size,
        )


@dataclass
class ReportSection:
    tau: float = 1.0 / 255.0
    plots: bool = True
    samples: int = 0

    def __post_init__(self) -> None:
        if self.tau <= 0:
            _fail("report", f"tau must be > 0, got {self.tau}")
        if self.samples < 0:
            _fail("report", f"samples must be >= 0, got {self.samples}")


SECTIONS: dict[str, type] = {
    "data": DataSection,
    "augment": AugmentSection,
    "encoding": EncodingSection,
    "autoencoder": ScheduleSection,
    "classifier": ScheduleSection,
    "dql": ScheduleSection,
    "transfer": TransferSection,
    "agent": AgentSection,
    "dp": DpSection,
    "gan": GanSection,
    "report": ReportSection,
}
SCALARS: dict[str, type] = {"seed": int, "threads": int, "out": str}


@dataclass
class ExperimentConfig:
    """
    Everything one experiment needs.

    Defaults reproduce the reference setup; only ``out`` is excluded from
    :func:`config_hash`, so moving a run directory keeps its identity.
    """

    seed: int = 0
    threads: int = 1
    out: str = "runs/gazemask"
    data: DataSection = field(default_factory=DataSection)
    augment: AugmentSection = field(default_factory=AugmentSection)
    encoding: EncodingSection = field(default_factory=EncodingSection)
    autoencoder: ScheduleSection = field(default_factory=ScheduleSection)
    classifier: ScheduleSection = field(default_factory=ScheduleSection)
    dql: ScheduleSection = field(default_factory=ScheduleSection)
    transfer: TransferSection = field(default_factory=TransferSection)
    agent: AgentSection = field(default_factory=AgentSection)
    dp: DpSection = field(default_factory=DpSection)
    gan: GanSection = field(default_factory=GanSection)
    report: ReportSection = field(default_factory=ReportSection)

    def __post_init__(self) -> None:
        if (
            isinstance(self.seed, bool)
            or not isinstance(self.seed, int)
            or self.seed < 0
        ):
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if not isinstance(self.threads, int) or self.threads < 0:
            raise ConfigError(f"threads must be >= 0, got {self.threads!r}")
        tasks = set(self.agent.keep) | set(self.agent.hide)
        if not tasks <= set(TASKS):
            raise ConfigError(f"agent tasks must be among {TASKS}, got {sorted(tasks)}")

    def schedules(self) -> dict[str, TrainingSchedule]:
        return {
            "autoencoder": self.autoencoder.resolve(AUTOENCODER_SCHEDULE),
            "classifier": self.classifier.resolve(CLASSIFIER_SCHEDULE),
            "dql": self.dql.resolve(DQL_SCHEDULE),
            "transfer": self.transfer.resolve(TRANSFER_SCHEDULE),
        }

    def with_flags(self, **flags: Any) -> "ExperimentConfig":
        """Apply command-line flags; ``None`` values are ignored."""
        root = {k: v for k, v in flags.items() if k in SCALARS and v is not None}
        agent = {
            k: v
            for k, v in flags.items()
            if k in ("iterations", "steps") and v is not None
        }
        cfg = replace(self, **root) if root else self
        if agent:
            cfg = replace(cfg, agent=replace(cfg.agent, **agent))
        return cfg

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def suggest(key: str, choices: Sequence[str]) -> str:
    match = difflib.get_close_matches(key, list(choices), n=1)
    return f" (did you mean {match[0]!r}?)" if match else ""


def _build_section(name: str, cls: type, values: Any) -> Any:
    if is_dataclass(values):
        return values
    if not isinstance(values, Mapping):
        kind = type(values).__name__
        raise ConfigError(f"section [{name}] must be a table, got {kind}")
    known = [f.name for f in fields(cls)]
    for key in values:
        if key not in known:
            raise ConfigError(f"unknown key {name}.{key}{suggest(key, known)}")
    try:
        return cls(**dict(values))
    except TypeError as exc:
        raise ConfigError(f"section [{name}]: {exc}") from exc


def config_from_dict(data: Mapping[str, Any]) -> ExperimentConfig:
    """Build a config from nested plain data, rejecting unknown keys."""
    allowed = [*SCALARS, *SECTIONS]
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key in SECTIONS:
            kwargs[key] = _build_section(key, SECTIONS[key], value)
        elif key in SCALARS:
            kwargs[key] = value
        else:
            raise ConfigError(f"unknown key {key!r}{suggest(key, allowed)}")
    return ExperimentConfig(**kwargs)


def _canonical(payload: Any) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def config_hash(config: ExperimentConfig) -> str:
    """sha256 of the canonical JSON of the config, ``out`` excluded."""
    payload = config.to_dict()
    payload.pop("out")
    return sha256_bytes(_canonical(payload))


# keys that decide how many stages run, never what one stage computes
STAGE_COUNT_KEYS: dict[str, tuple[str, ...]] = {"agent": ("iterations",)}


def section_hash(config: ExperimentConfig, names: Sequence[str]) -> str:
    """
    Hash of the seed, thread count and the named sections only.

    ``agent.iterations`` is left out, so extending a finished run re-uses
    every iteration already done.
    """
    payload = {"seed": config.seed, "threads": config.threads}
    for name in sorted(names):
        section = asdict(getattr(config, name))
        for key in STAGE_COUNT_KEYS.get(name, ()):
            section.pop(key)
        payload[name] = section
    return sha256_bytes(_canonical(payload))
