"""
Accuracy tables and artifact files.

Tables are plain pandas frames of pre-formatted strings so that the same
input always serializes to the same bytes. Every CSV starts with a comment
line ``# config_hash=<hash> seed=<seed>``; JSONL files start with a header
object carrying the same fields.
"""

import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import pandas as pd

from gazemask.data.records import chance_level

ACCURACY_COLUMNS = [
    "iteration",
    "stim_no_adapt",
    "sub_no_adapt",
    "stim_adapt",
    "sub_adapt",
]
TRANSFER_COLUMNS = ["setting", "stim_acc", "sub_acc"]
GAP = "-"


def fmt_acc(value: float | None, digits: int = 4) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return GAP
    return f"{value:.{digits}f}"


def _get(log: Any, name: str) -> Any:
    return log[name] if isinstance(log, Mapping) else getattr(log, name)


def accuracy_table(
    logs: Iterable[Any],
    n_classes: Mapping[str, int],
    iterations: int | None = None,
) -> pd.DataFrame:
    """
    One row per iteration plus a chance-level row.

    Each log provides ``iteration``, ``pre_adaptation_accuracy`` and
    ``post_adaptation_accuracy`` (dicts keyed by task). Iterations missing
    between 1 and ``iterations`` (default: the largest logged) appear with
    ``-`` in every column.
    """
    by_iteration = {int(_get(log, "iteration")): log for log in logs}
    last = iterations if iterations is not None else max(by_iteration, default=0)
    rows = []
    for it in range(1, last + 1):
        log = by_iteration.get(it)
        if log is None:
            rows.append([str(it), GAP, GAP, GAP, GAP])
            continue
        pre = _get(log, "pre_adaptation_accuracy") or {}
        post = _get(log, "post_adaptation_accuracy") or {}
        rows.append(
            [
                str(it),
                fmt_acc(pre.get("stimulus")),
                fmt_acc(pre.get("subject")),
                fmt_acc(post.get("stimulus")),
                fmt_acc(post.get("subject")),
            ]
        )
    stim = fmt_acc(chance_level(n_classes["stimulus"]), 2)
    sub = fmt_acc(chance_level(n_classes["subject"]), 2)
    rows.append(["chance", stim, sub, stim, sub])
    return pd.DataFrame(rows, columns=ACCURACY_COLUMNS)


def transfer_table(
    none: Mapping[str, float],
    manipulation: Mapping[str, float],
    adapted: Mapping[str, float],
    n_classes: Mapping[str, int],
) -> pd.DataFrame:
    """Accuracy with no manipulation, with manipulation, and after adaptation."""
    rows = [
        [name, fmt_acc(acc.get("stimulus")), fmt_acc(acc.get("subject"))]
        for name, acc in (
            ("none", none),
            ("manipulation", manipulation),
            ("adapted", adapted),
        )
    ]
    rows.append(
        [
            "chance",
            fmt_acc(chance_level(n_classes["stimulus"]), 2),
            fmt_acc(chance_level(n_classes["subject"]), 2),
        ]
    )
    return pd.DataFrame(rows, columns=TRANSFER_COLUMNS)


def header_line(config_hash: str, seed: int) -> str:
    return f"# config_hash={config_hash} seed={seed}"


def parse_header(line: str) -> dict[str, str]:
    fields = line.lstrip("#").split()
    return dict(f.split("=", 1) for f in fields if "=" in f)


def _fmt_cell(value: Any) -> Any:
    if isinstance(value, float):
        return GAP if math.isnan(value) else repr(round(value, 10))
    return value


def write_csv(
    frame: pd.DataFrame, path: str | Path, config_hash: str, seed: int
) -> Path:
    """Write ``frame`` with the provenance header; floats use a fixed repr."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = frame.map(_fmt_cell) if hasattr(frame, "map") else frame.applymap(_fmt_cell)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(header_line(config_hash, seed) + "\n")
        body.to_csv(f, index=False, lineterminator="\n")
    return path


def read_csv(path: str | Path) -> tuple[pd.DataFrame, dict[str, str]]:
    """Read a CSV written by :func:`write_csv`; returns ``(frame, header)``."""
    with open(path, encoding="utf-8") as f:
        first = f.readline()
        header = parse_header(first) if first.startswith("#") else {}
        if not first.startswith("#"):
            f.seek(0)
        frame = pd.read_csv(f, dtype=str, keep_default_na=False)
    return frame, header


def to_text(frame: pd.DataFrame) -> str:
    """Aligned human-readable rendering."""
    return frame.to_string(index=False) + "\n"


def write_jsonl(
    path: str | Path,
    records: Sequence[Mapping[str, Any]],
    config_hash: str,
    seed: int,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [json.dumps({"config_hash": config_hash, "seed": seed}, sort_keys=True)]
    lines.extend(json.dumps(dict(r), sort_keys=True) for r in records)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_jsonl(path: str | Path) -> tuple[dict[str, Any], list[dict[str, Any]]]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        return {}, []
    return json.loads(lines[0]), [json.loads(line) for line in lines[1:] if line]
