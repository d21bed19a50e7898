"""Training loops and inference primitives for the fixed architectures."""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from gazemask.errors import DataError, TrainingDiverged
from gazemask.models.architectures import (
    AutoencoderModel,
    ClassifierModel,
    DqlModel,
    ShapeError,
    images_to_tensor,
    tensor_to_images,
)
from gazemask.models.optim import MomentumSGD
from gazemask.models.schedule import (
    AUTOENCODER_SCHEDULE,
    CLASSIFIER_SCHEDULE,
    TrainingSchedule,
)
from gazemask.utils import seeded_torch, torch_seed_from

logger = logging.getLogger(__name__)

EVAL_BATCH = 256


class InsufficientData(DataError):
    """Raised when there is too little data for the requested operation."""


class MissingClass(DataError):
    """Raised when a class index has no training example."""


@dataclass
class TrainingTrace:
    """Per-epoch record of one training run."""

    lr: list[float] = field(default_factory=list)
    loss: list[float] = field(default_factory=list)
    train_accuracy: list[float] = field(default_factory=list)
    validation_accuracy: list[float] = field(default_factory=list)

    @property
    def epochs(self) -> int:
        return len(self.loss)

    @property
    def final_loss(self) -> float:
        return self.loss[-1] if self.loss else math.nan


def _shuffled_batches(
    n: int, batch_size: int, rng: np.random.Generator
) -> Iterator[np.ndarray]:
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def _balanced_batches(
    labels: np.ndarray, per_class: int, rng: np.random.Generator
) -> Iterator[np.ndarray]:
    """Batches with exactly ``per_class`` examples of each class."""
    classes = np.unique(labels)
    pools = {c: rng.permutation(np.flatnonzero(labels == c)) for c in classes}
    cursors = {c: 0 for c in classes}
    n_batches = max(1, math.ceil(len(labels) / (per_class * len(classes))))
    for _ in range(n_batches):
        batch = []
        for c in classes:
            pool = pools[c]
            for _ in range(per_class):
                if cursors[c] == len(pool):
                    pools[c] = pool = rng.permutation(pool)
                    cursors[c] = 0
                batch.append(pool[cursors[c]])
                cursors[c] += 1
        yield np.asarray(batch, dtype=np.int64)


def fit(
    model: nn.Module,
    inputs: torch.Tensor,
    loss_fn,
    schedule: TrainingSchedule,
    rng: np.random.Generator,
    labels: np.ndarray | None = None,
    on_epoch=None,
    log_every: int = 50,
) -> TrainingTrace:
    """
    Run ``schedule`` on ``model``.

    ``loss_fn(model, batch_inputs, batch_index)`` returns the scalar batch
    loss. An epoch is one pass over ``inputs`` in shuffled order, or, with
    ``schedule.per_class_batch``, the same number of class-balanced batches.
    ``on_epoch(epoch, trace)`` runs after each epoch.

    Raises:
        TrainingDiverged: The loss or a gradient became non-finite.
    """
    optimizer = MomentumSGD(
        model.parameters(),
        lr=schedule.lr_at(0),
        weight_decay=schedule.weight_decay,
        momentum=schedule.momentum,
    )
    trace = TrainingTrace()
    n = inputs.shape[0]
    epoch = 0
    while not schedule.should_stop(epoch):
        lr = schedule.lr_at(epoch)
        optimizer.set_lr(lr)
        model.train()
        if schedule.per_class_batch is not None and labels is not None:
            batches = _balanced_batches(labels, schedule.per_class_batch, rng)
        else:
            batches = _shuffled_batches(n, schedule.batch_size, rng)
        total, count = 0.0, 0
        for index in batches:
            optimizer.zero_grad()
            loss = loss_fn(model, inputs[torch.from_numpy(index)], index)
            if not torch.isfinite(loss):
                raise TrainingDiverged(f"loss became {loss.item()}", epoch=epoch)
            loss.backward()
            try:
                optimizer.step()
            except TrainingDiverged as e:
                raise TrainingDiverged(str(e), epoch=epoch) from None
            total += loss.item() * len(index)
            count += len(index)
        trace.lr.append(lr)
        trace.loss.append(total / max(count, 1))
        if on_epoch is not None:
            on_epoch(epoch, trace)
        if log_every and epoch % log_every == 0:
            logger.info(
                "%s epoch %d lr %.1e loss %.6f",
                type(model).__name__,
                epoch,
                lr,
                trace.loss[-1],
            )
        epoch += 1
    model.eval()
    return trace


def train_autoencoder(
    images: np.ndarray,
    schedule: TrainingSchedule = AUTOENCODER_SCHEDULE,
    rng: np.random.Generator | None = None,
    model: AutoencoderModel | None = None,
) -> tuple[AutoencoderModel, TrainingTrace]:
    """
    Train a fresh (or the given) autoencoder with an L2 reconstruction loss.

    Args:
        images: ``(N, H, W, 3)`` float images, ``N >= schedule.batch_size``.
        schedule: Defaults to the autoencoder schedule.
        rng: Drives initialization, batch order.

    Returns:
        The model in eval mode and its per-epoch trace (mean per-pixel MSE).
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    images = np.asarray(images, dtype=np.float32)
    if images.shape[0] < schedule.batch_size:
        raise InsufficientData(
            f"autoencoder training needs at least {schedule.batch_size} images, "
            f"got {images.shape[0]}"
        )
    x = images_to_tensor(images)
    with seeded_torch(torch_seed_from(rng)):
        if model is None:
            model = AutoencoderModel(resolution=images.shape[1])
        trace = fit(
            model,
            x,
            lambda m, batch, _: F.mse_loss(m(batch), batch),
            schedule,
            rng,
        )
    return model, trace


def _check_classes(labels: np.ndarray, n_classes: int) -> None:
    present = set(np.unique(labels).tolist())
    if any(lab < 0 or lab >= n_classes for lab in present):
        raise ValueError(f"labels must lie in [0, {n_classes})")
    missing = sorted(set(range(n_classes)) - present)
    if missing:
        raise MissingClass(f"class(es) {missing} have no training example")


def train_classifier(
    images: np.ndarray,
    labels: np.ndarray,
    n_classes: int,
    schedule: TrainingSchedule = CLASSIFIER_SCHEDULE,
    rng: np.random.Generator | None = None,
    validation: tuple[np.ndarray, np.ndarray] | None = None,
    track_every: int = 0,
) -> tuple[ClassifierModel, TrainingTrace]:
    """
    Train a freshly initialized classifier with softmax log-loss.

    ``track_every > 0`` records train (and ``validation``) accuracy every that
    many epochs, plus once after the last epoch.

    Raises:
        MissingClass: Some class in ``range(n_classes)`` has no example.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    images = np.asarray(images, dtype=np.float32)
    labels = np.asarray(labels, dtype=np.int64)
    if images.shape[0] != labels.shape[0]:
        raise ValueError("images and labels must have equal length")
    _check_classes(labels, n_classes)
    x = images_to_tensor(images)
    y = torch.from_numpy(labels)

    def loss_fn(m: nn.Module, batch: torch.Tensor, index: np.ndarray) -> torch.Tensor:
        return F.cross_entropy(m(batch), y[torch.from_numpy(index)])

    def on_epoch(epoch: int, trace: TrainingTrace) -> None:
        if track_every and epoch % track_every == 0:
            _track(model, trace)

    def _track(m: ClassifierModel, trace: TrainingTrace) -> None:
        trace.train_accuracy.append(accuracy(m, images, labels))
        if validation is not None:
            trace.validation_accuracy.append(accuracy(m, *validation))

    with seeded_torch(torch_seed_from(rng)):
        model = ClassifierModel(n_classes, resolution=images.shape[1])
        trace = fit(model, x, loss_fn, schedule, rng, labels=labels, on_epoch=on_epoch)
    if track_every:
        _track(model, trace)
    return model, trace


def _batched(model: nn.Module, images: np.ndarray, fn) -> np.ndarray:
    images = np.asarray(images, dtype=np.float32)
    single = images.ndim == 3
    if single:
        images = images[None]
    was_training = model.training
    model.eval()
    outs = []
    with torch.no_grad():
        for start in range(0, images.shape[0], EVAL_BATCH):
            outs.append(fn(images_to_tensor(images[start : start + EVAL_BATCH])))
    model.train(was_training)
    out = np.concatenate(outs) if outs else np.zeros((0,), dtype=np.float32)
    return out[0] if single else out


def encode(model: AutoencoderModel, images: np.ndarray) -> np.ndarray:
    """Flat non-negative bottleneck per image (``(4096,)`` or ``(N, 4096)``)."""
    return _batched(model, images, lambda x: model.encode(x).numpy())


def decode(model: AutoencoderModel, bottleneck: np.ndarray) -> np.ndarray:
    """Bottleneck(s) to images clamped to ``[0, 1]``."""
    b = np.asarray(bottleneck, dtype=np.float32)
    single = b.ndim == 1
    if single:
        b = b[None]
    if b.ndim != 2 or b.shape[1] != model.bottleneck_size:
        raise ShapeError(
            f"expected bottleneck of length {model.bottleneck_size}, got {b.shape}"
        )
    model.eval()
    with torch.no_grad():
        out = tensor_to_images(model.decode(torch.from_numpy(b)).clamp(0.0, 1.0))
    return out[0] if single else out


def reconstruct(model: AutoencoderModel, images: np.ndarray) -> np.ndarray:
    return _batched(
        model, images, lambda x: tensor_to_images(model(x).clamp(0.0, 1.0))
    )


def classify(model: ClassifierModel, images: np.ndarray) -> np.ndarray:
    """Softmax probabilities per image."""
    return _batched(model, images, lambda x: torch.softmax(model(x), dim=1).numpy())


def q_forward(model: DqlModel, images: np.ndarray) -> np.ndarray:
    """One value per bottleneck flag for each image."""
    return _batched(model, images, lambda x: model(x).numpy())


def accuracy(model: ClassifierModel, images: np.ndarray, labels: np.ndarray) -> float:
    labels = np.asarray(labels)
    if labels.size == 0:
        return math.nan
    return float(np.mean(classify(model, images).argmax(axis=1) == labels))


def true_class_probs(
    model: ClassifierModel, images: np.ndarray, labels: np.ndarray
) -> np.ndarray:
    """Probability each image's true class receives."""
    probs = classify(model, images)
    return probs[np.arange(len(labels)), np.asarray(labels, dtype=np.int64)]
