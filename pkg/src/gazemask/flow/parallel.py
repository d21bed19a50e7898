"""Ordered thread fan-out for independent, pure work items."""

import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Sequence, TypeVar

_T = TypeVar("_T")
_R = TypeVar("_R")


def resolve_workers(workers: int | None) -> int:
    """``None`` or ``0`` means one worker per CPU."""
    if workers is None or workers <= 0:
        return os.cpu_count() or 1
    return workers


def parallel_map(
    fn: Callable[[_T], _R],
    items: Sequence[_T],
    workers: int | None = 1,
) -> list[_R]:
    """
    Apply ``fn`` to every item, optionally on a thread pool.

    Results come back in input order regardless of completion order, so a
    deterministic ``fn`` gives a deterministic result list for any worker
    count. With one worker the items are processed inline.

    Args:
        fn: Pure function of one item. Randomness must be derived from the
            item itself (for example a per-item seed), never shared.
        items: Work items.
        workers: Maximum threads (``None``/``0``: CPU count).

    Returns:
        ``[fn(item) for item in items]``
    """
    max_workers = resolve_workers(workers)
    if max_workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]

    results: list[_R | None] = [None] * len(items)
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {executor.submit(fn, item): idx for idx, item in enumerate(items)}
        for future in as_completed(futures):
            results[futures[future]] = future.result()
    return results  # type: ignore[return-value]
