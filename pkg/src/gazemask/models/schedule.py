"""Training schedules: learning-rate decay, stop rule, batch sizes, loss."""

from dataclasses import dataclass, replace
from typing import Literal

LossKind = Literal["l2", "softmax-log"]

# a rate equal to stop_lr up to float rounding does not stop training
_STOP_SLACK = 1e-9


@dataclass(frozen=True)
class TrainingSchedule:
    """
    Step-decay SGD schedule.

    The learning rate for epoch ``e`` is
    ``initial_lr * decay_factor ** (e // decay_every)``; training stops before
    the first epoch whose rate falls below ``stop_lr``. ``max_epochs`` caps
    the run either way and is required when ``fixed_lr`` is set.
    ``per_class_batch`` switches to class-balanced batches holding that many
    examples of every class.
    """

    initial_lr: float
    decay_every: int
    decay_factor: float
    stop_lr: float
    weight_decay: float
    momentum: float
    batch_size: int
    loss: LossKind
    fixed_lr: bool = False
    max_epochs: int | None = None
    per_class_batch: int | None = None

    def __post_init__(self) -> None:
        if self.initial_lr <= 0:
            raise ValueError(f"initial_lr must be > 0, got {self.initial_lr}")
        if not 0.0 < self.decay_factor < 1.0:
            raise ValueError(f"decay_factor must be in (0, 1), got {self.decay_factor}")
        if self.decay_every < 1:
            raise ValueError(f"decay_every must be >= 1, got {self.decay_every}")
        if not self.fixed_lr and not self.stop_lr < self.initial_lr:
            raise ValueError("stop_lr must be below initial_lr")
        if self.fixed_lr and self.max_epochs is None:
            raise ValueError("a fixed-lr schedule needs max_epochs")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.loss not in ("l2", "softmax-log"):
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.weight_decay < 0 or not 0.0 <= self.momentum < 1.0:
            raise ValueError("weight_decay must be >= 0 and momentum in [0, 1)")
        if self.max_epochs is not None and self.max_epochs < 0:
            raise ValueError(f"max_epochs must be >= 0, got {self.max_epochs}")
        if self.per_class_batch is not None and self.per_class_batch < 1:
            raise ValueError("per_class_batch must be >= 1")

    def lr_at(self, epoch: int) -> float:
        if self.fixed_lr:
            return self.initial_lr
        return self.initial_lr * self.decay_factor ** (epoch // self.decay_every)

    def should_stop(self, epoch: int) -> bool:
        """True when ``epoch`` must not be trained."""
        if self.max_epochs is not None and epoch >= self.max_epochs:
            return True
        if self.fixed_lr:
            return False
        return self.lr_at(epoch) < self.stop_lr * (1.0 - _STOP_SLACK)

    def total_epochs(self) -> int:
        """Number of epochs the schedule trains before stopping."""
        epoch = 0
        while not self.should_stop(epoch):
            epoch += 1
        return epoch

    def with_overrides(self, **changes) -> "TrainingSchedule":
        return replace(self, **changes)


AUTOENCODER_SCHEDULE = TrainingSchedule(
    initial_lr=1e-2,
    decay_every=200,
    decay_factor=0.1,
    stop_lr=1e-7,
    weight_decay=5e-4,
    momentum=0.9,
    batch_size=40,
    loss="l2",
)

CLASSIFIER_SCHEDULE = TrainingSchedule(
    initial_lr=1e-4,
    decay_every=500,
    decay_factor=0.1,
    stop_lr=1e-7,
    weight_decay=5e-4,
    momentum=0.9,
    batch_size=50,
    loss="softmax-log",
)

DQL_SCHEDULE = TrainingSchedule(
    initial_lr=1e-4,
    decay_every=1,
    decay_factor=0.1,
    stop_lr=0.0,
    weight_decay=1e-5,
    momentum=0.9,
    batch_size=100,
    loss="l2",
    fixed_lr=True,
    max_epochs=10,
)

TRANSFER_SCHEDULE = TrainingSchedule(
    initial_lr=1e-2,
    decay_every=100,
    decay_factor=0.1,
    stop_lr=1e-7,
    weight_decay=5e-4,
    momentum=0.9,
    batch_size=50,
    loss="softmax-log",
    per_class_batch=2,
)
