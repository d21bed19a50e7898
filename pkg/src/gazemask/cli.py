"""gazemask CLI -- ``gazemask`` command-line interface."""

import argparse
import io
import json
import logging
import sys
from pathlib import Path

from gazemask import __version__
from gazemask.config import ExperimentConfig, config_hash
from gazemask.errors import GazemaskError
from gazemask.flow import experiment
from gazemask.main import resolve_config

logger = logging.getLogger("gazemask")

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def main(argv: list[str] | None = None) -> None:
    """CLI entry point."""
    if sys.stdout.encoding != "utf-8":
        sys.stdout = io.TextIOWrapper(
            sys.stdout.buffer, encoding="utf-8", errors="replace"
        )
    if sys.stderr.encoding != "utf-8":
        sys.stderr = io.TextIOWrapper(
            sys.stderr.buffer, encoding="utf-8", errors="replace"
        )

    parser = create_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        sys.exit(0)

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )
    try:
        args.func(args)
    except GazemaskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(exc.exit_code)
    sys.exit(0)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", "-c", help="Config file (.toml or .py)")
    parser.add_argument("--seed", type=int, help="Root seed")
    parser.add_argument("--iterations", type=int, help="Agent iterations")
    parser.add_argument("--steps", type=int, help="Training runs per iteration")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--threads", type=int, help="Worker threads (0: all CPUs)")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="Override a config key (repeatable). Coerced to the key's type.",
    )
    parser.add_argument(
        "--log-level", default="INFO", choices=LOG_LEVELS, help="Logging level"
    )


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gazemask",
        description="Privacy-preserving manipulation of gaze scanpath images",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    subparsers = parser.add_subparsers(title="commands", dest="command")

    commands = {
        "run": (cmd_run, "Full pipeline: pretrain, iterate both agents, report"),
        "dp": (cmd_dp, "Differential-privacy baseline frontier"),
        "gan": (cmd_gan, "Supervised GAN baseline"),
        "encode": (cmd_encode, "Encode the dataset to PNG images"),
        "synth": (cmd_synth, "Write a synthetic gaze CSV"),
        "transfer": (cmd_transfer, "Apply a trained agent to a second dataset"),
        "report": (cmd_report, "Rebuild report tables from a run directory"),
        "plot": (cmd_plot, "Plot report tables of a run directory"),
        "verify": (cmd_verify, "Re-hash the artifacts of a run directory"),
    }
    for name, (func, help_text) in commands.items():
        sub = subparsers.add_parser(name, help=help_text)
        _common(sub)
        if name == "synth":
            sub.add_argument("--dest", help="CSV path (default: <out>/synth.csv)")
        if name == "transfer":
            sub.add_argument("--run", help="Finished run directory (default: --out)")
        sub.set_defaults(func=func)
    return parser


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _config(
    args: argparse.Namespace, reuse_run_config: bool = False
) -> ExperimentConfig:
    """
    Resolve the config for a command: file, ``--set``, then flags.

    Commands that read an existing run (``report``, ``plot``, ``verify``) fall
    back to ``<out>/config.toml`` when no ``--config`` is given.
    """
    source = args.config
    if source is None and reuse_run_config and args.out:
        saved = Path(args.out) / "config.toml"
        if saved.exists():
            source = saved
    cfg = resolve_config(
        source,
        args.set,
        seed=args.seed,
        iterations=args.iterations,
        steps=args.steps,
        out=args.out,
        threads=args.threads,
    )
    logger.info("config hash %s seed %d out %s", config_hash(cfg), cfg.seed, cfg.out)
    return cfg


def _print_json(payload) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True, default=str))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_run(args: argparse.Namespace) -> None:
    cfg = _config(args)
    experiment.run_experiment(cfg)
    print((Path(cfg.out) / "report.txt").read_text(encoding="utf-8"), end="")
    print(f"Run finished: {cfg.out}")


def cmd_dp(args: argparse.Namespace) -> None:
    _print_json(experiment.run_dp(_config(args)))


def cmd_gan(args: argparse.Namespace) -> None:
    _print_json(experiment.run_gan(_config(args)))


def cmd_encode(args: argparse.Namespace) -> None:
    cfg = _config(args)
    count = experiment.run_encode(cfg)
    print(f"Encoded {count} scanpaths to {Path(cfg.out) / 'images'}")


def cmd_synth(args: argparse.Namespace) -> None:
    path = experiment.run_synth(_config(args), args.dest)
    print(f"Wrote {path}")


def cmd_transfer(args: argparse.Namespace) -> None:
    cfg = _config(args)
    if args.run:
        cfg = resolve_config(cfg, [f"transfer.run={args.run}"])
    _print_json(experiment.run_transfer(cfg))


def cmd_report(args: argparse.Namespace) -> None:
    cfg = _config(args, reuse_run_config=True)
    experiment.run_report(cfg)
    print((Path(cfg.out) / "report.txt").read_text(encoding="utf-8"), end="")


def cmd_plot(args: argparse.Namespace) -> None:
    for path in experiment.run_plot(_config(args, reuse_run_config=True)):
        print(f"Wrote {path}")


def cmd_verify(args: argparse.Namespace) -> None:
    cfg = _config(args, reuse_run_config=True)
    count = experiment.verify(cfg.out)
    print(f"Verified {count} files in {cfg.out}")
