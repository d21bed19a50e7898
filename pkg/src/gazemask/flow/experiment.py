"""
Experiment stages behind the CLI subcommands.

Every command builds a :class:`StagedPipeline` over a shared output
directory. Stages draw randomness from ``make_rng(config.seed, <stage>, ...)``
so any stage can be re-run alone and see the streams it saw the first time.

Output layout::

    <out>/config.toml                resolved config
    <out>/stages/<stage>.json        completion markers
    <out>/models/*.gzm               autoencoder and classifier checkpoints
    <out>/agent/*.gzm                DQL networks and memories per iteration
    <out>/iterations/iteration-NN.json
    <out>/iterations.jsonl           one report per iteration
    <out>/report.csv / report.txt    accuracy per iteration plus chance row
    <out>/importance.csv             channel importance per iteration
    <out>/dp/, <out>/gan/, <out>/transfer/
    <out>/manifest.json              sha256 of every artifact
"""

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from gazemask.agents import (
    ClassifierMemory,
    IterationReport,
    ManipulationAgent,
    ReplayMemory,
    RewardEvaluator,
    adapt,
    init_memory,
    manipulate_set,
    record_batch,
    run_iteration,
)
from gazemask.analysis import (
    ChannelImportance,
    accuracy_table,
    aggregate_importance,
    importance_table,
    plot_accuracy,
    plot_importance,
    read_csv,
    read_jsonl,
    to_text,
    transfer_table,
    write_csv,
    write_jsonl,
)
from gazemask.baselines import (
    NoFeasibleEpsilon,
    dp_evaluate,
    gan_evaluate,
    gan_pretrain,
    gan_train,
    l1_sensitivity_image,
    l1_sensitivity_raw,
    select_optimal_epsilon,
)
from gazemask.codec import expand_with_augmentations, to_png
from gazemask.config import DataSection, ExperimentConfig, save_config
from gazemask.data import (
    ImageSet,
    LabeledRecord,
    LabelSpace,
    chance_level,
    encode_records,
    load_gaze_csv,
    split_fifty_fifty,
    synth_generate,
    write_gaze_csv,
)
from gazemask.data.records import TASKS
from gazemask.errors import ConfigError, DataError, IntegrityError
from gazemask.flow.pipeline import STAGES_DIR, RunContext, Stage, StagedPipeline
from gazemask.models import (
    accuracy,
    load_model,
    parameter_hash,
    reconstruct,
    save_model,
    train_autoencoder,
    train_classifier,
)
from gazemask.utils import derive_seed, make_rng, resolve_path, sha256_file

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
ITERATIONS_FILE = "iterations.jsonl"
REPORT_FILE = "report.csv"
IMPORTANCE_FILE = "importance.csv"


# -- data ---------------------------------------------------------------------


def load_records(
    data: DataSection, seed: int, curve_offset: int | None = None, label: str = "synth"
) -> list[LabeledRecord]:
    """Records from ``data.source`` or, without one, a synthetic dataset."""
    if data.source:
        return load_gaze_csv(
            Path(data.source),
            data.schema(),
            out_of_range=data.out_of_range,
            trial_gap=data.trial_gap,
        )
    return synth_generate(
        data.n_subjects,
        data.n_stimuli,
        data.trials_per_pair,
        data.signature_strength,
        make_rng(seed, label),
        n_points=data.n_points,
        curve_offset=data.curve_offset if curve_offset is None else curve_offset,
    )


def _augmented_pool(
    cfg: ExperimentConfig, records: list[LabeledRecord], plain: ImageSet, label: str
) -> ImageSet:
    if not cfg.augment.enabled or cfg.augment.copies == 0:
        return plain
    params = cfg.augment.params(derive_seed(cfg.seed, label))
    items, paths = expand_with_augmentations(
        records,
        [r.scanpath for r in records],
        params,
        cfg.augment.copies,
        params.make_rng(),
    )
    return encode_records(
        items, cfg.encoding.params(), "train", cfg.threads, scanpaths=paths
    )


def prepare_dataset(
    cfg: ExperimentConfig, records: list[LabeledRecord], label: str = ""
) -> dict[str, Any]:
    """Split, encode and augment; returns the pieces every later stage uses."""
    if not records:
        raise DataError("the dataset holds no records")
    split = split_fifty_fifty(records, make_rng(cfg.seed, label + "split"))
    enc = cfg.encoding.params()
    train = encode_records(split.train, enc, "train", cfg.threads)
    test = encode_records(split.test, enc, "test", cfg.threads)
    return {
        "records": records,
        "split": split,
        "n_classes": LabelSpace.from_records(records).as_dict(),
        "train": train,
        "test": test,
        "pool": _augmented_pool(cfg, split.train, train, label + "augment"),
    }


def _data_run(ctx: RunContext) -> dict[str, Any]:
    cfg = ctx.config
    ctx.state.update(prepare_dataset(cfg, load_records(cfg.data, cfg.seed)))
    s = ctx.state
    logger.info(
        "data: %d records, train %d (pool %d), test %d, classes %s",
        len(s["records"]),
        len(s["train"]),
        len(s["pool"]),
        len(s["test"]),
        s["n_classes"],
    )
    return {
        "records": len(s["records"]),
        "train": len(s["train"]),
        "test": len(s["test"]),
        "pool": len(s["pool"]),
        "n_classes": s["n_classes"],
    }


DATA_STAGE = Stage("data", _data_run, depends=("data", "augment", "encoding"))


# -- pretrained models ------------------------------------------------------------


def _save(ctx: RunContext, stage: str, model, *parts: str, **meta: Any) -> Path:
    path = ctx.produced(stage, ctx.path(*parts))
    save_model(model, path, seed=ctx.seed, meta=ctx.meta(**meta))
    return path


def _autoencoder_run(ctx: RunContext) -> dict[str, Any]:
    schedule = ctx.config.schedules()["autoencoder"]
    model, trace = train_autoencoder(
        ctx.state["pool"].images, schedule, make_rng(ctx.seed, "autoencoder")
    )
    _save(ctx, "autoencoder", model, "models", "autoencoder.gzm", epochs=trace.epochs)
    ctx.state["autoencoder"] = model
    return {"epochs": trace.epochs, "final_loss": trace.final_loss}


def _autoencoder_load(ctx: RunContext, summary: dict[str, Any]) -> None:
    ctx.state["autoencoder"], _ = load_model(ctx.out / "models" / "autoencoder.gzm")


AUTOENCODER_STAGE = Stage(
    "autoencoder",
    _autoencoder_run,
    _autoencoder_load,
    depends=("autoencoder",),
    after=("data",),
)


def _classifiers_run(ctx: RunContext) -> dict[str, Any]:
    schedule = ctx.config.schedules()["classifier"]
    pool, test = ctx.state["pool"], ctx.state["test"]
    classifiers, baseline = {}, {}
    for task in TASKS:
        model, trace = train_classifier(
            pool.images,
            pool.labels(task),
            ctx.state["n_classes"][task],
            schedule,
            make_rng(ctx.seed, "classifier", task),
        )
        _save(ctx, "classifiers", model, "models", f"classifier-{task}.gzm", task=task)
        classifiers[task] = model
        baseline[task] = accuracy(model, test.images, test.labels(task))
    logger.info("pretrained classifiers, unmanipulated test accuracy %s", baseline)
    ctx.state["classifiers"] = classifiers
    return {"baseline_accuracy": baseline}


def _classifiers_load(ctx: RunContext, summary: dict[str, Any]) -> None:
    ctx.state["classifiers"] = {
        task: load_model(ctx.out / "models" / f"classifier-{task}.gzm")[0]
        for task in TASKS
    }


CLASSIFIERS_STAGE = Stage(
    "classifiers",
    _classifiers_run,
    _classifiers_load,
    depends=("classifier",),
    after=("data",),
)


# -- manipulation agent ------------------------------------------------------------


def _evaluator(ctx: RunContext, agent: ManipulationAgent) -> RewardEvaluator:
    return RewardEvaluator(
        ctx.state["autoencoder"],
        ctx.state["classifiers"],
        agent.spec,
        ctx.config.threads,
    )


def _agent_files(iteration: int) -> dict[str, tuple[str, ...]]:
    tag = "init" if iteration == 0 else f"{iteration:02d}"
    return {
        "dql1": ("agent", f"dql1-{tag}.gzm"),
        "dql2": ("agent", f"dql2-{tag}.gzm"),
        "replay": ("agent", f"replay-{tag}.gzm"),
        "memory": ("agent", f"classifier-memory-{tag}.gzm"),
    }


def _save_agent(ctx: RunContext, stage: str, iteration: int) -> None:
    agent: ManipulationAgent = ctx.state["agent"]
    files = _agent_files(iteration)
    _save(ctx, stage, agent.dql1, *files["dql1"])
    _save(ctx, stage, agent.dql2, *files["dql2"], sync_runs=agent.sync.runs)
    replay = ctx.produced(stage, ctx.path(*files["replay"]))
    agent.memory.save(replay, ctx.meta())
    memory = ctx.produced(stage, ctx.path(*files["memory"]))
    ctx.state["classifier_memory"].save(memory, ctx.meta())
    if iteration > 0:
        for task, model in ctx.state["classifiers"].items():
            _save(ctx, stage, model, "models", f"classifier-{task}-{iteration:02d}.gzm")


def _restore_agent(ctx: RunContext) -> None:
    """Rebuild the agent from the last reused stage before a stage needs it."""
    iteration = ctx.state.pop("restore_from", None)
    if iteration is None:
        return
    cfg = ctx.config
    files = _agent_files(iteration)
    dql1, _ = load_model(ctx.out.joinpath(*files["dql1"]))
    dql2, container = load_model(ctx.out.joinpath(*files["dql2"]))
    agent = ManipulationAgent(
        ctx.state["autoencoder"],
        dql1,
        ReplayMemory.load(ctx.out.joinpath(*files["replay"])),
        cfg.agent.reward_spec(),
        cfg.agent.params(),
        cfg.schedules()["dql"],
        dql2=dql2,
    )
    agent.sync.runs = int(container.meta.get("sync_runs", 0))
    ctx.state["agent"] = agent
    ctx.state["classifier_memory"] = ClassifierMemory.load(
        ctx.out.joinpath(*files["memory"])
    )
    if iteration > 0:
        ctx.state["classifiers"] = {
            task: load_model(
                ctx.out / "models" / f"classifier-{task}-{iteration:02d}.gzm"
            )[0]
            for task in TASKS
        }
    logger.info("restored agent state after iteration %d", iteration)


def _memory_run(ctx: RunContext) -> dict[str, Any]:
    cfg = ctx.config
    params = cfg.agent.params()
    agent = ManipulationAgent.create(
        ctx.state["autoencoder"],
        cfg.agent.reward_spec(),
        make_rng(ctx.seed, "dql-init"),
        params,
        cfg.schedules()["dql"],
    )
    init_memory(
        agent.memory,
        ctx.state["train"],
        _evaluator(ctx, agent),
        make_rng(ctx.seed, "replay-init"),
        max_images=params.init_images,
    )
    ctx.state["agent"] = agent
    ctx.state["classifier_memory"] = ClassifierMemory()
    _save_agent(ctx, "memory", 0)
    rewards = agent.memory.rewards()
    return {"entries": len(agent.memory), "mean_reward": float(rewards.mean())}


def _memory_load(ctx: RunContext, summary: dict[str, Any]) -> None:
    ctx.state["restore_from"] = 0


MEMORY_STAGE = Stage(
    "memory",
    _memory_run,
    _memory_load,
    depends=("agent", "dql"),
    after=("autoencoder", "classifiers"),
)


def _iteration_path(iteration: int) -> tuple[str, str]:
    return ("iterations", f"iteration-{iteration:02d}.json")


def _iteration_stage(iteration: int) -> Stage:
    name = f"iteration-{iteration:02d}"

    def run(ctx: RunContext) -> dict[str, Any]:
        _restore_agent(ctx)
        cfg = ctx.config
        agent: ManipulationAgent = ctx.state["agent"]
        train, test = ctx.state["train"], ctx.state["test"]
        autoencoder = ctx.state["autoencoder"]

        result = run_iteration(
            agent,
            train,
            test,
            _evaluator(ctx, agent),
            make_rng(ctx.seed, "iteration", iteration),
            iteration=iteration,
        )
        memory: ClassifierMemory = ctx.state["classifier_memory"]
        record_batch(memory, result.manipulated_train, iteration)

        manipulated_test = manipulate_set(test, agent.dql1, autoencoder)
        base = ctx.state["pool"] if cfg.augment.during_adaptation else train
        adapted = adapt(
            memory,
            base,
            ctx.state["n_classes"],
            make_rng(ctx.seed, "adapt", iteration),
            cfg.schedules()["classifier"],
            test=manipulated_test,
            tasks=TASKS,
        )
        ctx.state["classifiers"] = adapted.classifiers
        report = result.report
        report.post_adaptation_accuracy = dict(adapted.accuracy)

        importance = aggregate_importance(
            reconstruct(autoencoder, test.images),
            manipulated_test.images,
            cfg.report.tau,
        )
        record = {
            "report": json.loads(report.to_json()),
            "importance": {
                "red_pct": importance.red_pct,
                "green_pct": importance.green_pct,
                "blue_pct": importance.blue_pct,
                "degenerate": importance.degenerate,
            },
        }
        path = ctx.produced(name, ctx.path(*_iteration_path(iteration)))
        path.write_text(json.dumps(record, indent=2, sort_keys=True), encoding="utf-8")
        for i in range(min(cfg.report.samples, len(manipulated_test))):
            sample = ctx.path("samples", name, f"test-{i:03d}.png")
            ctx.produced(name, to_png(manipulated_test.images[i], sample))
        _save_agent(ctx, name, iteration)
        logger.info(
            "iteration %d: pre %s post %s importance r/g/b %.1f/%.1f/%.1f",
            iteration,
            {k: round(v, 4) for k, v in report.pre_adaptation_accuracy.items()},
            {k: round(v, 4) for k, v in report.post_adaptation_accuracy.items()},
            *importance.as_tuple(),
        )
        return {
            "runs": report.runs,
            "pre": report.pre_adaptation_accuracy,
            "post": report.post_adaptation_accuracy,
        }

    def load(ctx: RunContext, summary: dict[str, Any]) -> None:
        ctx.state["restore_from"] = iteration

    after = ("memory",) if iteration == 1 else (f"iteration-{iteration - 1:02d}",)
    return Stage(name, run, load, depends=("report",), after=after)


def load_iteration_records(out: Path, iterations: int) -> list[dict[str, Any]]:
    records = []
    for it in range(1, iterations + 1):
        path = out.joinpath(*_iteration_path(it))
        if path.exists():
            records.append(json.loads(path.read_text(encoding="utf-8")))
    return records


def write_reports(
    ctx: RunContext, records: list[dict[str, Any]], iterations: int
) -> dict[str, Any]:
    """Accuracy and importance tables, iteration log, plots."""
    cfg = ctx.config
    logs = [IterationReport.from_dict(r["report"]) for r in records]
    table = accuracy_table(logs, ctx.state["n_classes"], iterations)
    importance = importance_table(
        {
            r["report"]["iteration"]: ChannelImportance(**r["importance"])
            for r in records
        }
    )
    report_csv = write_csv(table, ctx.path(REPORT_FILE), ctx.config_hash, ctx.seed)
    importance_csv = write_csv(
        importance, ctx.path(IMPORTANCE_FILE), ctx.config_hash, ctx.seed
    )
    ctx.path("report.txt").write_text(to_text(table), encoding="utf-8")
    write_jsonl(ctx.path(ITERATIONS_FILE), records, ctx.config_hash, ctx.seed)
    if cfg.report.plots:
        plot_accuracy(report_csv, ctx.path("plots", "accuracy.png"))
        if len(importance):
            plot_importance(importance_csv, ctx.path("plots", "importance.png"))
    return {"rows": len(table), "completed": len(records)}


def _reports_run(ctx: RunContext) -> dict[str, Any]:
    iterations = ctx.config.agent.iterations
    return write_reports(ctx, load_iteration_records(ctx.out, iterations), iterations)


# -- manifest -------------------------------------------------------------------------


def _artifact_files(out: Path) -> list[Path]:
    return sorted(
        p
        for p in out.rglob("*")
        if p.is_file()
        and p.name != MANIFEST
        and STAGES_DIR not in p.relative_to(out).parts
    )


def write_manifest(ctx: RunContext) -> Path:
    files = {
        p.relative_to(ctx.out).as_posix(): sha256_file(p)
        for p in _artifact_files(ctx.out)
    }
    manifest = {"config_hash": ctx.config_hash, "seed": ctx.seed, "files": files}
    path = ctx.path(MANIFEST)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")
    return path


def verify(out: str | Path) -> int:
    """
    Re-hash every artifact listed in the manifest and check the provenance
    header of every CSV / JSONL file.

    Returns:
        Number of verified files.

    Raises:
        IntegrityError: A file is missing, changed, or carries another
            config hash or seed.
    """
    out = Path(out)
    path = out / MANIFEST
    if not path.exists():
        raise IntegrityError(f"no {MANIFEST} in {out}")
    manifest = json.loads(path.read_text(encoding="utf-8"))
    expected = {"config_hash": manifest["config_hash"], "seed": str(manifest["seed"])}
    problems = []
    for rel, digest in sorted(manifest["files"].items()):
        file = out / rel
        if not file.exists():
            problems.append(f"{rel}: missing")
            continue
        if sha256_file(file) != digest:
            problems.append(f"{rel}: hash mismatch")
            continue
        if file.suffix == ".csv":
            _, header = read_csv(file)
        elif file.suffix == ".jsonl":
            header, _ = read_jsonl(file)
            header = {k: str(v) for k, v in header.items()}
        else:
            continue
        if {k: header.get(k) for k in expected} != expected:
            problems.append(f"{rel}: header {header} does not match the manifest")
    if problems:
        raise IntegrityError("verification failed:\n  " + "\n  ".join(problems))
    logger.info("verified %d files in %s", len(manifest["files"]), out)
    return len(manifest["files"])


# -- commands -------------------------------------------------------------------------


def _context(cfg: ExperimentConfig) -> RunContext:
    ctx = RunContext(cfg, Path(cfg.out))
    save_config(cfg, ctx.path("config.toml"))
    return ctx


def run_experiment(cfg: ExperimentConfig) -> dict[str, Any]:
    """Data, pretraining, replay initialization, iterations, reports."""
    ctx = _context(cfg)
    stages = [DATA_STAGE, AUTOENCODER_STAGE, CLASSIFIERS_STAGE, MEMORY_STAGE]
    stages += [_iteration_stage(it) for it in range(1, cfg.agent.iterations + 1)]
    stages.append(Stage("reports", _reports_run))
    summaries = StagedPipeline(stages, ctx).run()
    write_manifest(ctx)
    return summaries


def _dp_run(ctx: RunContext) -> dict[str, Any]:
    cfg = ctx.config
    s = ctx.state
    hide = cfg.agent.hide[0]
    chance = chance_level(s["n_classes"][hide])
    selected: dict[str, Any] = {}
    failures = []
    for domain in cfg.dp.domains:
        if domain == "image":
            data = s["test"]
            sensitivity = l1_sensitivity_image(
                np.concatenate([s["train"].images, s["test"].images])
            )
        else:
            data = s["split"].test
            sensitivity = l1_sensitivity_raw([r.scanpath for r in s["records"]])
        frontier = dp_evaluate(
            cfg.dp.sweep(domain),
            data,
            s["classifiers"],
            sensitivity,
            seed=derive_seed(ctx.seed, "dp"),
            repetitions=cfg.dp.repetitions,
            encoding=cfg.encoding.params(),
            workers=cfg.threads,
        )
        path = ctx.path("dp", f"frontier-{domain}.csv")
        ctx.produced("dp", write_csv(frontier, path, ctx.config_hash, ctx.seed))
        try:
            eps = select_optimal_epsilon(frontier, chance, cfg.dp.tolerance)
            selected[domain] = {"epsilon": eps}
        except NoFeasibleEpsilon as exc:
            logger.warning("dp %s: %s", domain, exc)
            selected[domain] = {"epsilon": None, "nearest": exc.nearest}
            failures.append(f"{domain}: {exc}")
    path = ctx.produced("dp", ctx.path("dp", "selected.json"))
    payload = {"config_hash": ctx.config_hash, "seed": ctx.seed, "selected": selected}
    text = json.dumps(payload, indent=2, sort_keys=True, default=float)
    path.write_text(text, encoding="utf-8")
    if failures:
        raise NoFeasibleEpsilon("; ".join(failures))
    return selected


def run_dp(cfg: ExperimentConfig) -> dict[str, Any]:
    """Frontier of the Laplace mechanism per domain plus the selected epsilon."""
    ctx = _context(cfg)
    stages = [
        DATA_STAGE,
        CLASSIFIERS_STAGE,
        Stage("dp", _dp_run, depends=("dp",), after=("classifiers",)),
    ]
    try:
        return StagedPipeline(stages, ctx).run()["dp"]
    finally:
        write_manifest(ctx)


def _gan_run(ctx: RunContext) -> dict[str, Any]:
    cfg = ctx.config
    s = ctx.state
    keep, hide = cfg.agent.keep[0], cfg.agent.hide[0]
    params = cfg.gan.params(keep, hide)
    schedules = cfg.schedules()
    ae, keep_model, hide_model = gan_pretrain(
        s["pool"],
        s["n_classes"],
        make_rng(ctx.seed, "gan-pretrain"),
        params,
        schedules["autoencoder"],
        schedules["classifier"],
    )
    generator, report = gan_train(
        ae,
        keep_model,
        hide_model,
        s["pool"],
        make_rng(ctx.seed, "gan"),
        params,
        schedules["autoencoder"],
        schedules["classifier"],
    )
    report = gan_evaluate(
        generator,
        {keep: keep_model, hide: hide_model},
        s["train"],
        s["test"],
        s["n_classes"],
        make_rng(ctx.seed, "gan-adapt"),
        report,
        schedules["classifier"],
    )
    _save(ctx, "gan", generator, "gan", "generator.gzm")
    log = {
        "iteration": 1,
        "pre_adaptation_accuracy": {
            "stimulus": report.stim_no_adapt,
            "subject": report.sub_no_adapt,
        },
        "post_adaptation_accuracy": {
            "stimulus": report.stim_adapt,
            "subject": report.sub_adapt,
        },
    }
    table = accuracy_table([log], s["n_classes"])
    table.loc[0, "iteration"] = "gan"
    report_csv = ctx.path("gan", "report.csv")
    ctx.produced("gan", write_csv(table, report_csv, ctx.config_hash, ctx.seed))
    return report.as_dict()


def run_gan(cfg: ExperimentConfig) -> dict[str, Any]:
    """Supervised GAN baseline."""
    ctx = _context(cfg)
    gan = Stage(
        "gan",
        _gan_run,
        depends=("gan", "agent", "autoencoder", "classifier"),
        after=("data",),
    )
    stages = [DATA_STAGE, gan]
    try:
        return StagedPipeline(stages, ctx).run()["gan"]
    finally:
        write_manifest(ctx)


def _transfer_run(ctx: RunContext) -> dict[str, Any]:
    cfg = ctx.config
    source = Path(cfg.transfer.run)
    autoencoder, _ = load_model(source / "models" / "autoencoder.gzm")
    last = _last_iteration(source)
    dql1, _ = load_model(source.joinpath(*_agent_files(last)["dql1"]))
    hashes = {"autoencoder": parameter_hash(autoencoder), "dql": parameter_hash(dql1)}

    data = DataSection(**{**vars(cfg.data), "source": cfg.transfer.source})
    records = load_records(data, cfg.seed, cfg.transfer.curve_offset, "transfer-synth")
    prepared = prepare_dataset(cfg, records, "transfer-")
    train, test, n_classes = prepared["train"], prepared["test"], prepared["n_classes"]
    manipulated_test = manipulate_set(test, dql1, autoencoder)
    manipulated_train = manipulate_set(train, dql1, autoencoder)

    schedule = cfg.schedules()["transfer"]
    pool = prepared["pool"] if cfg.augment.during_adaptation else train
    none, manipulation = {}, {}
    for task in TASKS:
        model, _ = train_classifier(
            pool.images,
            pool.labels(task),
            n_classes[task],
            schedule,
            make_rng(ctx.seed, "transfer-classifier", task),
        )
        none[task] = accuracy(model, test.images, test.labels(task))
        manipulation[task] = accuracy(
            model, manipulated_test.images, manipulated_test.labels(task)
        )
    memory = ClassifierMemory()
    record_batch(memory, manipulated_train, 1)
    adapted = adapt(
        memory,
        pool,
        n_classes,
        make_rng(ctx.seed, "transfer-adapt"),
        schedule,
        test=manipulated_test,
        tasks=TASKS,
    )

    after = {"autoencoder": parameter_hash(autoencoder), "dql": parameter_hash(dql1)}
    if after != hashes:
        raise IntegrityError(f"transfer changed frozen parameters: {hashes} -> {after}")
    table = transfer_table(none, manipulation, adapted.accuracy, n_classes)
    ctx.produced(
        "transfer",
        write_csv(table, ctx.path("transfer", "report.csv"), ctx.config_hash, ctx.seed),
    )
    ctx.path("transfer", "report.txt").write_text(to_text(table), encoding="utf-8")
    return {
        "none": none,
        "manipulation": manipulation,
        "adapted": adapted.accuracy,
        "parameter_hashes": hashes,
    }


def _last_iteration(run_dir: Path) -> int:
    found = [
        int(p.stem.split("-")[1])
        for p in (run_dir / "agent").glob("dql1-*.gzm")
        if p.stem.split("-")[1].isdigit()
    ]
    if not found:
        raise DataError(f"no trained manipulation agent under {run_dir}")
    return max(found)


def run_transfer(cfg: ExperimentConfig) -> dict[str, Any]:
    """Frozen autoencoder and DQL1 on a second dataset; only classifiers retrain."""
    if not cfg.transfer.run:
        raise ConfigError("transfer needs a finished run: set transfer.run or --run")
    if resolve_path(cfg.transfer.run) == resolve_path(cfg.out):
        raise ConfigError(
            f"transfer output {cfg.out} is the source run; pick another --out"
        )
    ctx = _context(cfg)
    stages = [
        Stage(
            "transfer",
            _transfer_run,
            depends=("transfer", "data", "augment", "encoding", "agent"),
        )
    ]
    try:
        return StagedPipeline(stages, ctx).run()["transfer"]
    finally:
        write_manifest(ctx)


def run_encode(cfg: ExperimentConfig) -> int:
    """Encode every record of the dataset to an 8-bit PNG; returns the count."""
    ctx = _context(cfg)
    records = load_records(cfg.data, cfg.seed)
    images = encode_records(records, cfg.encoding.params(), workers=cfg.threads)
    for record, image in zip(records, images.images):
        path = record.scanpath
        name = f"{path.subject_id}_{path.stimulus_id}_{path.trial_id}.png"
        to_png(image, ctx.path("images", name))
    write_manifest(ctx)
    logger.info("encoded %d scanpaths to %s", len(records), ctx.out / "images")
    return len(records)


def run_synth(cfg: ExperimentConfig, dest: str | Path | None = None) -> Path:
    """Write the synthetic dataset described by ``[data]`` as a gaze CSV."""
    records = synth_generate(
        cfg.data.n_subjects,
        cfg.data.n_stimuli,
        cfg.data.trials_per_pair,
        cfg.data.signature_strength,
        make_rng(cfg.seed, "synth"),
        n_points=cfg.data.n_points,
        curve_offset=cfg.data.curve_offset,
    )
    dest = Path(dest) if dest is not None else Path(cfg.out) / "synth.csv"
    dest.parent.mkdir(parents=True, exist_ok=True)
    write_gaze_csv(records, dest)
    logger.info("wrote %d synthetic trials to %s", len(records), dest)
    return dest


def run_report(cfg: ExperimentConfig) -> dict[str, Any]:
    """Rebuild the tables from the iteration files of an existing run."""
    ctx = RunContext(cfg, Path(cfg.out))
    records = load_iteration_records(ctx.out, cfg.agent.iterations)
    if not records:
        raise DataError(f"no iteration results under {ctx.out}")
    data = json.loads((ctx.out / STAGES_DIR / "data.json").read_text(encoding="utf-8"))
    ctx.state["n_classes"] = data["summary"]["n_classes"]
    summary = write_reports(ctx, records, cfg.agent.iterations)
    write_manifest(ctx)
    return summary


def run_plot(cfg: ExperimentConfig) -> list[Path]:
    """PNG plots from the CSV tables of an existing run."""
    ctx = RunContext(cfg, Path(cfg.out))
    out = ctx.out
    made = []
    if (out / REPORT_FILE).exists():
        made.append(plot_accuracy(out / REPORT_FILE, out / "plots" / "accuracy.png"))
    if (out / IMPORTANCE_FILE).exists():
        made.append(
            plot_importance(out / IMPORTANCE_FILE, out / "plots" / "importance.png")
        )
    if not made:
        raise DataError(f"no report tables under {out}")
    write_manifest(ctx)
    return made
