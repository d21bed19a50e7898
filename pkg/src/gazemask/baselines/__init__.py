"""Comparison baselines: Laplacian differential privacy and a supervised GAN."""

from gazemask.baselines.dp import (
    FRONTIER_COLUMNS,
    DpConfig,
    EpsilonSweep,
    InvalidScale,
    NoFeasibleEpsilon,
    Skipped,
    dp_evaluate,
    dp_image,
    dp_raw,
    l1_sensitivity_image,
    l1_sensitivity_raw,
    laplace_noise,
    majority_vote,
    resample,
    select_optimal_epsilon,
)
from gazemask.baselines.gan import (
    GanParams,
    GanReport,
    discriminator_score,
    gan_evaluate,
    gan_pretrain,
    gan_train,
    generator_adversarial_loss,
)

__all__ = [
    "FRONTIER_COLUMNS",
    "DpConfig",
    "EpsilonSweep",
    "GanParams",
    "GanReport",
    "InvalidScale",
    "NoFeasibleEpsilon",
    "Skipped",
    "discriminator_score",
    "dp_evaluate",
    "dp_image",
    "dp_raw",
    "gan_evaluate",
    "gan_pretrain",
    "gan_train",
    "generator_adversarial_loss",
    "l1_sensitivity_image",
    "l1_sensitivity_raw",
    "laplace_noise",
    "majority_vote",
    "resample",
    "select_optimal_epsilon",
]
