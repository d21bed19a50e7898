"""The Manipulation Agent (Deep-Q masking) and the Classification Agent."""

from gazemask.agents.actions import (
    InvalidQValues,
    apply_mask,
    random_mask,
    sweep_masks,
    sweep_size,
    threshold_actions,
)
from gazemask.agents.classification import (
    AdaptResult,
    ClassifierMemory,
    PhaseError,
    adapt,
    record_batch,
)
from gazemask.agents.manipulation import (
    AgentParams,
    DiscountSchedule,
    IterationReport,
    IterationResult,
    ManipulationAgent,
    TargetSync,
    dql_batch_loss,
    init_memory,
    manipulate,
    manipulate_set,
    run_iteration,
    train_dql,
)
from gazemask.agents.replay import (
    CapacityError,
    EmptyMemory,
    ReplayEntry,
    ReplayMemory,
)
from gazemask.agents.reward import (
    InvalidRewardSpec,
    RewardEvaluator,
    RewardSpec,
    compute_reward,
)

__all__ = [
    "AdaptResult",
    "AgentParams",
    "CapacityError",
    "ClassifierMemory",
    "DiscountSchedule",
    "EmptyMemory",
    "InvalidQValues",
    "InvalidRewardSpec",
    "IterationReport",
    "IterationResult",
    "ManipulationAgent",
    "PhaseError",
    "ReplayEntry",
    "ReplayMemory",
    "RewardEvaluator",
    "RewardSpec",
    "TargetSync",
    "adapt",
    "apply_mask",
    "compute_reward",
    "dql_batch_loss",
    "init_memory",
    "manipulate",
    "manipulate_set",
    "random_mask",
    "record_batch",
    "run_iteration",
    "sweep_masks",
    "sweep_size",
    "threshold_actions",
    "train_dql",
]
