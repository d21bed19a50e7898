"""Tests for gazemask.agents.reward."""

import numpy as np
import pytest

from gazemask.agents import (
    InvalidRewardSpec,
    RewardEvaluator,
    RewardSpec,
    compute_reward,
)
from gazemask.errors import ConfigError

SPEC = RewardSpec()


def test_default_targets():
    assert SPEC.keep == ("stimulus",) and SPEC.hide == ("subject",)
    assert SPEC.tasks == ("stimulus", "subject")


@pytest.mark.parametrize(
    "keep, hide",
    [
        ((), ("subject",)),
        (("stimulus",), ()),
        (("subject",), ("subject",)),
        (("x",), ("subject",)),
    ],
)
def test_invalid_specs(keep, hide):
    with pytest.raises(InvalidRewardSpec):
        RewardSpec(keep, hide)
    assert issubclass(InvalidRewardSpec, ConfigError)


def test_reward_is_keep_minus_hide():
    assert compute_reward(SPEC, [0.9], [0.2]) == pytest.approx(0.7)
    assert compute_reward(SPEC, [0.0], [1.0]) == pytest.approx(-1.0)


def test_reward_per_sample():
    out = compute_reward(SPEC, [[0.9, 0.5]], [[0.1, 0.5]])
    np.testing.assert_allclose(out, [0.8, 0.0])


def test_multiple_targets_are_averaged():
    spec = RewardSpec(keep=("stimulus",), hide=("subject",))
    assert compute_reward(spec, np.array([1.0]), np.array([0.5])) == 0.5


def test_reward_rejects_bad_probabilities():
    with pytest.raises(ValueError):
        compute_reward(SPEC, [1.2], [0.1])
    with pytest.raises(InvalidRewardSpec):
        compute_reward(SPEC, [], [0.1])
    with pytest.raises(InvalidRewardSpec):
        compute_reward(SPEC, [0.5, 0.5], [0.1])


def test_evaluator_needs_every_classifier(tiny_models):
    autoencoder, classifiers = tiny_models
    with pytest.raises(InvalidRewardSpec):
        RewardEvaluator(autoencoder, {"stimulus": classifiers["stimulus"]}, SPEC)


def test_evaluator_scores_masks(tiny_models, tiny_images):
    autoencoder, classifiers = tiny_models
    evaluator = RewardEvaluator(autoencoder, classifiers, SPEC, workers=2)
    masks = np.zeros((5, autoencoder.bottleneck_size), dtype=np.uint8)
    masks[np.arange(5), np.arange(5)] = 1
    labels = {t: int(tiny_images.labels(t)[0]) for t in SPEC.tasks}
    rewards = evaluator.rewards(tiny_images.images[0], labels, masks)
    assert rewards.shape == (5,)
    assert np.all((rewards >= -1.0) & (rewards <= 1.0))

    per_image = evaluator.rewards_per_image(
        np.repeat(tiny_images.images[:1], 5, axis=0),
        {t: np.full(5, labels[t]) for t in SPEC.tasks},
        masks,
    )
    np.testing.assert_allclose(per_image, rewards, atol=1e-5)


def test_evaluator_is_thread_count_independent(tiny_models, tiny_images):
    autoencoder, classifiers = tiny_models
    masks = np.random.default_rng(0).integers(
        0, 2, size=(600, autoencoder.bottleneck_size), dtype=np.uint8
    )
    labels = {"stimulus": 0, "subject": 1}
    one = RewardEvaluator(autoencoder, classifiers, SPEC, workers=1)
    many = RewardEvaluator(autoencoder, classifiers, SPEC, workers=3)
    image = tiny_images.images[4]
    np.testing.assert_array_equal(
        one.rewards(image, labels, masks), many.rewards(image, labels, masks)
    )
