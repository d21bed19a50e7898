"""Bounded experience replay for the Manipulation Agent."""

import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterator, Mapping, Sequence

import numpy as np

from gazemask.data.records import ProvenanceError
from gazemask.errors import DataError
from gazemask.models.checkpoint import Container, load_container, save_container

DEFAULT_CAPACITY = 200_000


class CapacityError(DataError):
    """Raised when the memory cannot hold a single image's initialization sweep."""

    def __init__(self, capacity: int, required: int) -> None:
        super().__init__(
            f"replay capacity {capacity} is below the {required} entries one "
            "image's initialization sweep needs"
        )
        self.capacity = capacity
        self.required = required


class EmptyMemory(DataError):
    """Raised when training is requested on an empty memory."""


@dataclass(frozen=True, eq=False)
class ReplayEntry:
    """
    One (state, action, reward) experience.

    ``state`` is shared by reference between the entries of one image. The
    action is kept bit-packed; :attr:`mask` unpacks it.
    """

    state: np.ndarray
    action_bits: np.ndarray
    n_actions: int
    reward: float

    @classmethod
    def create(
        cls, state: np.ndarray, mask: np.ndarray, reward: float
    ) -> "ReplayEntry":
        mask = np.asarray(mask)
        if mask.ndim != 1:
            raise ValueError(f"mask must be 1-D, got shape {mask.shape}")
        if not np.isfinite(reward) or not -1.0 <= reward <= 1.0:
            raise ValueError(f"reward must be finite and in [-1, 1], got {reward}")
        return cls(state, np.packbits(mask.astype(bool)), mask.shape[0], float(reward))

    @property
    def mask(self) -> np.ndarray:
        return np.unpackbits(self.action_bits, count=self.n_actions)


class ReplayMemory:
    """
    Ring buffer of :class:`ReplayEntry` with oldest-first eviction.

    One writer, many readers: appends and snapshots hold a lock, sampling
    works on a snapshot so a concurrent append never tears a batch.
    """

    def __init__(self, capacity: int = DEFAULT_CAPACITY) -> None:
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self._capacity = int(capacity)
        self._next_idx = 0
        self._memory: list[ReplayEntry] = []
        self._lock = threading.Lock()

    @property
    def capacity(self) -> int:
        return self._capacity

    def __len__(self) -> int:
        return len(self._memory)

    def append(
        self,
        state: np.ndarray,
        mask: np.ndarray,
        reward: float,
        provenance: str = "train",
    ) -> None:
        """
        Store one experience.

        Raises:
            ProvenanceError: ``state`` does not come from the training set.
        """
        if provenance != "train":
            raise ProvenanceError(
                f"replay memory only accepts training-set states, got {provenance!r}"
            )
        entry = ReplayEntry.create(state, mask, reward)
        with self._lock:
            if self._next_idx >= len(self._memory):
                self._memory.append(entry)
            else:
                self._memory[self._next_idx] = entry
            self._next_idx = (self._next_idx + 1) % self._capacity

    def extend(
        self,
        state: np.ndarray,
        masks: np.ndarray,
        rewards: Sequence[float],
        provenance: str = "train",
    ) -> None:
        """Store many actions taken on the same state."""
        for mask, reward in zip(masks, rewards):
            self.append(state, mask, float(reward), provenance)

    def snapshot(self) -> list[ReplayEntry]:
        with self._lock:
            return list(self._memory)

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[ReplayEntry]:
        """Uniform mini-batch drawn with replacement."""
        entries = self.snapshot()
        if not entries:
            raise EmptyMemory("cannot sample from an empty replay memory")
        idx = rng.integers(0, len(entries), size=batch_size)
        return [entries[i] for i in idx]

    def epoch_batches(
        self,
        batch_size: int,
        rng: np.random.Generator,
        max_batches: int | None = None,
    ) -> Iterator[list[ReplayEntry]]:
        """
        One shuffled pass over a snapshot of the memory.

        ``max_batches`` stops the pass early; the batches it yields are still
        uniform samples of the memory.
        """
        entries = self.snapshot()
        if not entries:
            raise EmptyMemory("cannot train on an empty replay memory")
        order = rng.permutation(len(entries))
        for n, start in enumerate(range(0, len(entries), batch_size)):
            if max_batches is not None and n >= max_batches:
                return
            yield [entries[i] for i in order[start : start + batch_size]]

    def rewards(self) -> np.ndarray:
        return np.array([e.reward for e in self.snapshot()], dtype=np.float64)

    def to_container(self, meta: Mapping[str, Any] | None = None) -> Container:
        """Entries in ring order with the write cursor; shared states stored once."""
        with self._lock:
            entries = list(self._memory)
            next_idx = self._next_idx
        state_ids: dict[tuple, int] = {}
        states: list[np.ndarray] = []
        index = np.empty(len(entries), dtype=np.int64)
        for i, entry in enumerate(entries):
            key = (entry.state.__array_interface__["data"][0], entry.state.shape)
            if key not in state_ids:
                state_ids[key] = len(states)
                states.append(entry.state)
            index[i] = state_ids[key]
        n_actions = entries[0].n_actions if entries else 0
        tensors = {
            "states": (
                np.stack(states).astype(np.float32)
                if states
                else np.zeros((0, 0, 0, 3), dtype=np.float32)
            ),
            "state_index": index,
            "actions": (
                np.stack([e.action_bits for e in entries])
                if entries
                else np.zeros((0, 0), dtype=np.uint8)
            ),
            "rewards": np.array([e.reward for e in entries], dtype=np.float64),
        }
        return Container(
            "replay-memory",
            tensors,
            n_classes=n_actions,
            seed=0,
            epoch=0,
            meta={
                "capacity": self._capacity,
                "next_idx": next_idx,
                **dict(meta or {}),
            },
        )

    def save(self, dest: str | Path, meta: Mapping[str, Any] | None = None) -> None:
        save_container(self.to_container(meta), dest)

    @classmethod
    def from_container(cls, container: Container) -> "ReplayMemory":
        if container.arch_id != "replay-memory":
            raise DataError(f"not a replay memory container: {container.arch_id!r}")
        mem = cls(int(container.meta.get("capacity", DEFAULT_CAPACITY)))
        t = container.tensors
        states = list(t["states"])
        mem._memory = [
            ReplayEntry(states[idx], bits, container.n_classes, float(reward))
            for idx, bits, reward in zip(t["state_index"], t["actions"], t["rewards"])
        ]
        if len(mem._memory) > mem.capacity:
            raise DataError("replay container holds more entries than its capacity")
        mem._next_idx = int(container.meta.get("next_idx", len(mem._memory)))
        mem._next_idx %= mem.capacity
        return mem

    @classmethod
    def load(cls, source: str | Path) -> "ReplayMemory":
        return cls.from_container(load_container(source))
