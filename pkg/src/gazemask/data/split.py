"""Balanced 50/50 train/test split."""

import warnings
from collections import defaultdict
from typing import Sequence

import numpy as np

from gazemask.data.records import DatasetSplit, LabeledRecord

Vertex = tuple[str, int]


class SplitWarning(UserWarning):
    """A (subject, stimulus) cell was too small to be split."""


def _orient_leftovers(
    edges: list[tuple[int, int, int]],
) -> dict[int, bool]:
    """
    Assign each leftover record to train (True) or test (False).

    Leftovers are edges of the bipartite subject/stimulus graph. Walking
    trails and orienting every edge along the walk (leaving a subject means
    train, leaving a stimulus means test) keeps every vertex within one of
    balance. Trails are started at odd-degree vertices first so each of
    those ends exactly one open trail; odd-length open trails alternate
    their sign so the global train/test difference stays within one.
    """
    adjacency: dict[Vertex, list[int]] = defaultdict(list)
    for eid, (subject, stimulus, _) in enumerate(edges):
        adjacency[("s", subject)].append(eid)
        adjacency[("t", stimulus)].append(eid)
    used = [False] * len(edges)
    cursor: dict[Vertex, int] = defaultdict(int)

    def remaining(v: Vertex) -> int:
        return sum(1 for e in adjacency[v] if not used[e])

    def next_edge(v: Vertex) -> int | None:
        lst = adjacency[v]
        while cursor[v] < len(lst) and used[lst[cursor[v]]]:
            cursor[v] += 1
        return lst[cursor[v]] if cursor[v] < len(lst) else None

    assignment: dict[int, bool] = {}
    next_sign = 1
    vertices = sorted(adjacency)
    while True:
        odd = [v for v in vertices if remaining(v) % 2 == 1]
        if odd:
            start = odd[0]
        else:
            pending = [v for v in vertices if remaining(v) > 0]
            if not pending:
                break
            start = pending[0]

        trail: list[int] = []
        v = start
        while (eid := next_edge(v)) is not None:
            used[eid] = True
            subject, stimulus, rec = edges[eid]
            assignment[rec] = v[0] == "s"
            trail.append(rec)
            v = ("t", stimulus) if v[0] == "s" else ("s", subject)

        if len(trail) % 2 == 1:
            sign = 1 if start[0] == "s" else -1
            if sign != next_sign:
                for rec in trail:
                    assignment[rec] = not assignment[rec]
            next_sign = -next_sign
    return assignment


def split_fifty_fifty(
    records: Sequence[LabeledRecord], rng: np.random.Generator
) -> DatasetSplit:
    """
    Split records 50/50 with per-class balance for both label kinds.

    Records are grouped into (subject, stimulus) cells and shuffled inside
    each cell. Pairs go one to each side; the odd record of a cell is placed
    by :func:`_orient_leftovers`. Cells holding a single record go to train
    with a :class:`SplitWarning`, so every class stays present in train.
    Both output lists keep the input order.
    """
    cells: dict[tuple[int, int], list[int]] = defaultdict(list)
    for idx, rec in enumerate(records):
        cells[(rec.subject_label, rec.stimulus_label)].append(idx)

    side: dict[int, bool] = {}
    leftovers: list[tuple[int, int, int]] = []
    singletons: list[tuple[int, int]] = []
    for cell in sorted(cells):
        members = cells[cell]
        order = [members[i] for i in rng.permutation(len(members))]
        if len(order) == 1:
            side[order[0]] = True
            singletons.append(cell)
            continue
        half = len(order) // 2
        for idx in order[:half]:
            side[idx] = True
        for idx in order[half : 2 * half]:
            side[idx] = False
        if len(order) % 2:
            leftovers.append((cell[0], cell[1], order[-1]))

    side.update(_orient_leftovers(leftovers))

    if singletons:
        warnings.warn(
            f"{len(singletons)} (subject, stimulus) cell(s) hold a single record "
            "and were placed in train; balance is best-effort",
            SplitWarning,
            stacklevel=2,
        )
    train = [records[i] for i in range(len(records)) if side[i]]
    test = [records[i] for i in range(len(records)) if not side[i]]
    return DatasetSplit(train=train, test=test)
