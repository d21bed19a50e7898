"""
The Manipulation Agent.

A Deep-Q network (DQL1) looks at an encoded image and scores every
bottleneck value; values scoring at least 0.5 are zeroed before decoding.
DQL1 regresses toward ``R + gamma * DQL2`` on replayed experiences, where
DQL2 is a copy of DQL1 refreshed every few training runs.
"""

import copy
import itertools
import json
import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Iterator, Mapping

import numpy as np
import torch

from gazemask.agents.actions import (
    apply_mask,
    random_mask,
    sweep_masks,
    sweep_size,
    threshold_actions,
)
from gazemask.agents.replay import CapacityError, ReplayEntry, ReplayMemory
from gazemask.agents.reward import RewardEvaluator, RewardSpec
from gazemask.data.records import ImageSet, ProvenanceError
from gazemask.errors import TrainingDiverged
from gazemask.models.architectures import AutoencoderModel, DqlModel, images_to_tensor
from gazemask.models.optim import MomentumSGD
from gazemask.models.schedule import DQL_SCHEDULE, TrainingSchedule
from gazemask.models.training import accuracy, decode, encode, q_forward
from gazemask.utils import seeded_torch, torch_seed_from

logger = logging.getLogger(__name__)

MAX_RANDOM_FLAGS = 100


@dataclass
class TargetSync:
    """Counts DQL1 training runs and copies DQL1 into DQL2 every ``every`` runs."""

    every: int = 10
    runs: int = 0

    def __post_init__(self) -> None:
        if self.every < 1:
            raise ValueError(f"sync interval must be >= 1, got {self.every}")

    def tick(self, dql1: DqlModel, dql2: DqlModel) -> bool:
        self.runs += 1
        if self.runs % self.every == 0:
            dql2.load_state_dict(dql1.state_dict())
            return True
        return False


@dataclass(frozen=True)
class DiscountSchedule:
    """
    Linear annealing of the discount ``gamma`` and exploration rate
    ``epsilon`` across the training runs of one iteration.
    """

    gamma_start: float = 0.9
    gamma_end: float = 0.1
    epsilon_start: float = 0.5
    epsilon_end: float = 0.05
    runs: int = 1000

    def __post_init__(self) -> None:
        for name in ("gamma_start", "gamma_end", "epsilon_start", "epsilon_end"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")

    def _fraction(self, run: int) -> float:
        if self.runs == 1:
            return 0.0
        return min(max(run, 0), self.runs - 1) / (self.runs - 1)

    def gamma_at(self, run: int) -> float:
        f = self._fraction(run)
        return self.gamma_start + (self.gamma_end - self.gamma_start) * f

    def epsilon_at(self, run: int) -> float:
        f = self._fraction(run)
        return self.epsilon_start + (self.epsilon_end - self.epsilon_start) * f

    @classmethod
    def constant(cls, gamma: float, epsilon: float = 0.0) -> "DiscountSchedule":
        return cls(gamma, gamma, epsilon, epsilon, runs=1)


@dataclass(frozen=True)
class AgentParams:
    """Knobs of the Manipulation Agent's training loop."""

    steps: int = 1000
    images_per_run: int = 10
    tolerance: float = 0.005
    window: int = 50
    sync_every: int = 10
    capacity: int = 200_000
    init_images: int | None = None
    max_batches_per_epoch: int | None = None
    gamma_start: float = 0.9
    gamma_end: float = 0.1
    epsilon_start: float = 0.5
    epsilon_end: float = 0.05

    def discount(self) -> DiscountSchedule:
        return DiscountSchedule(
            self.gamma_start,
            self.gamma_end,
            self.epsilon_start,
            self.epsilon_end,
            runs=max(self.steps, 1),
        )


def _chunks(items: Iterable[np.ndarray], size: int) -> Iterator[np.ndarray]:
    it = iter(items)
    while chunk := list(itertools.islice(it, size)):
        yield np.stack(chunk)


def init_memory(
    mem: ReplayMemory,
    train: ImageSet,
    evaluator: RewardEvaluator,
    rng: np.random.Generator,
    max_images: int | None = None,
    chunk: int = 1024,
) -> ReplayMemory:
    """
    Seed the memory with the single-flag and random multi-flag sweep.

    Images are drawn without replacement; at most as many as the capacity
    holds complete sweeps (and at most ``max_images``).

    Raises:
        CapacityError: The capacity is below one image's sweep.
        ProvenanceError: ``train`` is not training data.
    """
    if train.provenance != "train":
        raise ProvenanceError("the replay memory is seeded from training data only")
    n_bits = evaluator.autoencoder.bottleneck_size
    required = sweep_size(n_bits)
    if mem.capacity < required:
        raise CapacityError(mem.capacity, required)
    n_images = min(len(train), mem.capacity // required)
    if max_images is not None:
        n_images = min(n_images, max_images)
    picks = rng.choice(len(train), size=n_images, replace=False)
    for count, idx in enumerate(sorted(picks.tolist()), start=1):
        state = train.images[idx]
        labels = {t: int(train.labels(t)[idx]) for t in evaluator.spec.tasks}
        for masks in _chunks(sweep_masks(rng, n_bits), chunk):
            mem.extend(state, masks, evaluator.rewards(state, labels, masks))
        logger.info("replay init: image %d/%d, %d entries", count, n_images, len(mem))
    return mem


def dql_batch_loss(
    dql1: DqlModel,
    dql2: DqlModel,
    batch: list[ReplayEntry],
    gamma: float,
) -> tuple[torch.Tensor, torch.Tensor]:
    """
    Loss of one replay batch.

    Acted outputs (flag 1) regress toward ``R + gamma * DQL2``, the others
    toward ``gamma * DQL2``. Returns ``(total, acted_term)``; each term is the
    mean squared error over its positions.
    """
    state_index: dict[int, int] = {}
    states = []
    rows = []
    for entry in batch:
        key = id(entry.state)
        if key not in state_index:
            state_index[key] = len(states)
            states.append(entry.state)
        rows.append(state_index[key])
    x = images_to_tensor(np.stack(states))
    rows_t = torch.as_tensor(rows, dtype=torch.int64)
    mask = torch.from_numpy(np.stack([e.mask for e in batch]).astype(np.float32))
    reward = torch.tensor([e.reward for e in batch], dtype=torch.float32)[:, None]

    q1 = dql1(x)[rows_t]
    with torch.no_grad():
        q2 = dql2(x)[rows_t]
    acted = mask
    unacted = 1.0 - mask
    acted_err = (q1 - (reward + gamma * q2)) ** 2
    unacted_err = (q1 - gamma * q2) ** 2
    acted_term = (acted * acted_err).sum() / acted.sum().clamp_min(1.0)
    unacted_term = (unacted * unacted_err).sum() / unacted.sum().clamp_min(1.0)
    return acted_term + unacted_term, acted_term


def train_dql(
    dql1: DqlModel,
    dql2: DqlModel,
    mem: ReplayMemory,
    gamma: float,
    rng: np.random.Generator,
    schedule: TrainingSchedule = DQL_SCHEDULE,
    max_batches_per_epoch: int | None = None,
    sync: TargetSync | None = None,
) -> list[float]:
    """
    One training run of DQL1: ``schedule.max_epochs`` passes over the memory.

    DQL2 is only read here, except when ``sync`` says this run is a sync
    point, in which case DQL1 is copied into it afterwards.

    Returns:
        Mean acted-position loss per epoch.

    Raises:
        EmptyMemory: Nothing to train on.
        TrainingDiverged: Loss or gradients became non-finite.
    """
    optimizer = MomentumSGD(
        dql1.parameters(),
        lr=schedule.lr_at(0),
        weight_decay=schedule.weight_decay,
        momentum=schedule.momentum,
    )
    dql2.eval()
    trace: list[float] = []
    epoch = 0
    while not schedule.should_stop(epoch):
        optimizer.set_lr(schedule.lr_at(epoch))
        dql1.train()
        total, count = 0.0, 0
        for batch in mem.epoch_batches(
            schedule.batch_size, rng, max_batches_per_epoch
        ):
            optimizer.zero_grad()
            loss, acted = dql_batch_loss(dql1, dql2, batch, gamma)
            if not torch.isfinite(loss):
                raise TrainingDiverged(f"DQL loss became {loss.item()}", epoch)
            loss.backward()
            try:
                optimizer.step()
            except TrainingDiverged as e:
                raise TrainingDiverged(str(e), epoch) from None
            total += acted.item() * len(batch)
            count += len(batch)
        trace.append(total / max(count, 1))
        epoch += 1
    dql1.eval()
    if sync is not None and sync.tick(dql1, dql2):
        logger.debug("DQL2 synced after run %d", sync.runs)
    return trace


def manipulate(
    images: np.ndarray, dql1: DqlModel, autoencoder: AutoencoderModel
) -> tuple[np.ndarray, np.ndarray]:
    """
    Greedy manipulation of one image or a batch.

    Returns ``decode(apply_mask(encode(x), threshold_actions(q_forward(x))))``
    together with the masks used.
    """
    masks = threshold_actions(q_forward(dql1, images))
    bottleneck = apply_mask(encode(autoencoder, images), masks)
    return decode(autoencoder, bottleneck), masks


def manipulate_set(
    images: ImageSet, dql1: DqlModel, autoencoder: AutoencoderModel
) -> ImageSet:
    if len(images) == 0:
        return images
    out, _ = manipulate(images.images, dql1, autoencoder)
    return images.with_images(out)


@dataclass
class IterationReport:
    iteration: int
    runs: int
    mean_reward: float
    pre_adaptation_accuracy: dict[str, float] = field(default_factory=dict)
    post_adaptation_accuracy: dict[str, float] = field(default_factory=dict)
    reward_trace: list[float] = field(default_factory=list)
    stopped_early: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, data: Mapping) -> "IterationReport":
        return cls(**dict(data))


@dataclass
class IterationResult:
    report: IterationReport
    manipulated_train: ImageSet


class ManipulationAgent:
    """DQL1, its target copy DQL2, the replay memory and the frozen autoencoder."""

    def __init__(
        self,
        autoencoder: AutoencoderModel,
        dql1: DqlModel,
        memory: ReplayMemory,
        spec: RewardSpec,
        params: AgentParams = AgentParams(),
        schedule: TrainingSchedule = DQL_SCHEDULE,
        dql2: DqlModel | None = None,
    ) -> None:
        self.autoencoder = autoencoder
        self.dql1 = dql1
        self.dql2 = dql2 if dql2 is not None else copy.deepcopy(dql1)
        self.dql2.eval()
        self.memory = memory
        self.spec = spec
        self.params = params
        self.schedule = schedule
        self.sync = TargetSync(params.sync_every)

    @classmethod
    def create(
        cls,
        autoencoder: AutoencoderModel,
        spec: RewardSpec,
        rng: np.random.Generator,
        params: AgentParams = AgentParams(),
        schedule: TrainingSchedule = DQL_SCHEDULE,
    ) -> "ManipulationAgent":
        with seeded_torch(torch_seed_from(rng)):
            dql1 = DqlModel(resolution=autoencoder.resolution)
        dql1.eval()
        return cls(
            autoencoder, dql1, ReplayMemory(params.capacity), spec, params, schedule
        )

    def policy_masks(self, images: np.ndarray) -> np.ndarray:
        return threshold_actions(q_forward(self.dql1, images))

    def explore(
        self, masks: np.ndarray, epsilon: float, rng: np.random.Generator
    ) -> np.ndarray:
        """Replace each mask with a random 1-100 flag mask with probability epsilon."""
        out = masks.copy()
        n_bits = masks.shape[1]
        for i in np.flatnonzero(rng.random(masks.shape[0]) < epsilon):
            k = int(rng.integers(1, min(MAX_RANDOM_FLAGS, n_bits) + 1))
            out[i] = random_mask(k, rng, n_bits)
        return out


def _moving_average_settled(rewards: list[float], window: int, tol: float) -> bool:
    if tol <= 0 or len(rewards) < 2 * window:
        return False
    last = np.mean(rewards[-window:])
    prev = np.mean(rewards[-2 * window : -window])
    return abs(last - prev) < tol


def run_iteration(
    agent: ManipulationAgent,
    train: ImageSet,
    test: ImageSet,
    evaluator: RewardEvaluator,
    rng: np.random.Generator,
    iteration: int = 1,
    steps: int | None = None,
) -> IterationResult:
    """
    One iteration of the Manipulation Agent against frozen classifiers.

    Each training run manipulates a sample of training images (with
    epsilon-greedy exploration), stores the rewarded experiences and trains
    DQL1 once. The loop ends after ``steps`` runs or when the moving average
    of the run rewards settles. Afterwards the test set is manipulated with
    the greedy policy to measure pre-adaptation accuracy, and the whole
    training set is manipulated for the Classification Agent.
    """
    if train.provenance != "train":
        raise ProvenanceError("the agent trains on training data only")
    params = agent.params
    steps = params.steps if steps is None else steps
    discount = replace(params, steps=steps).discount()
    run_rewards: list[float] = []
    stopped_early = False
    for run in range(steps):
        n = min(params.images_per_run, len(train))
        idx = np.sort(rng.choice(len(train), size=n, replace=False))
        images = train.images[idx]
        masks = agent.explore(
            agent.policy_masks(images), discount.epsilon_at(run), rng
        )
        labels = {t: train.labels(t)[idx] for t in agent.spec.tasks}
        rewards = evaluator.rewards_per_image(images, labels, masks)
        for i, mask, reward in zip(idx, masks, rewards):
            agent.memory.append(train.images[i], mask, float(reward), train.provenance)
        run_rewards.append(float(np.mean(rewards)))

        train_dql(
            agent.dql1,
            agent.dql2,
            agent.memory,
            discount.gamma_at(run),
            rng,
            agent.schedule,
            params.max_batches_per_epoch,
            agent.sync,
        )
        if (run + 1) % 50 == 0:
            logger.info(
                "iteration %d run %d/%d mean reward %.4f",
                iteration,
                run + 1,
                steps,
                run_rewards[-1],
            )
        if _moving_average_settled(run_rewards, params.window, params.tolerance):
            stopped_early = True
            logger.info(
                "iteration %d: reward settled after %d runs", iteration, run + 1
            )
            break

    manipulated_test = manipulate_set(test, agent.dql1, agent.autoencoder)
    pre = {
        task: accuracy(
            evaluator.classifiers[task],
            manipulated_test.images,
            manipulated_test.labels(task),
        )
        for task in agent.spec.tasks
    }
    report = IterationReport(
        iteration=iteration,
        runs=len(run_rewards),
        mean_reward=float(np.mean(run_rewards)) if run_rewards else float("nan"),
        pre_adaptation_accuracy=pre,
        reward_trace=run_rewards,
        stopped_early=stopped_early,
    )
    return IterationResult(
        report, manipulate_set(train, agent.dql1, agent.autoencoder)
    )
