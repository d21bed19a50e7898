"""
Supervised GAN baseline.

The autoencoder is the generator. Two classifiers form the discriminator:
the keep classifier should still recognise its label on generated images,
the hide classifier should not. Each contributes half of the score, in
opposite directions::

    D(G(x)) = 0.5 * p_keep(true) + 0.5 * (1 - p_hide(true))

The generator minimises ``log(1 - D(G(x)))`` plus a weighted L2
reconstruction term; the classifiers keep learning the true labels of both
real and generated images.
"""

import copy
import logging
from dataclasses import asdict, dataclass, field
from typing import Mapping

import numpy as np
import torch
import torch.nn.functional as F

from gazemask.data.records import ImageSet
from gazemask.errors import TrainingDiverged
from gazemask.models.architectures import (
    AutoencoderModel,
    ClassifierModel,
    images_to_tensor,
)
from gazemask.models.optim import MomentumSGD
from gazemask.models.schedule import (
    AUTOENCODER_SCHEDULE,
    CLASSIFIER_SCHEDULE,
    TrainingSchedule,
)
from gazemask.models.training import accuracy, reconstruct, train_classifier
from gazemask.utils import seeded_torch, torch_seed_from

logger = logging.getLogger(__name__)

D_CLAMP = 1.0 - 1e-6


@dataclass(frozen=True)
class GanParams:
    pretrain_epochs: int = 100
    epochs: int = 100
    recon_weight: float = 1.0
    keep: str = "stimulus"
    hide: str = "subject"
    batch_size: int = 40

    def __post_init__(self) -> None:
        if self.keep == self.hide:
            raise ValueError("keep and hide must name different tasks")
        if self.recon_weight < 0:
            raise ValueError(f"recon_weight must be >= 0, got {self.recon_weight}")


@dataclass
class GanReport:
    stim_no_adapt: float
    sub_no_adapt: float
    stim_adapt: float
    sub_adapt: float
    generator_loss: list[float] = field(default_factory=list)
    discriminator_loss: list[float] = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)


def discriminator_score(p_keep, p_hide):
    """Inverse-signed composition of the two classifiers; always in [0, 1]."""
    return 0.5 * p_keep + 0.5 * (1.0 - p_hide)


def generator_adversarial_loss(d: torch.Tensor) -> torch.Tensor:
    return torch.log1p(-d.clamp(max=D_CLAMP)).mean()


def _true_prob(
    model: ClassifierModel, x: torch.Tensor, y: torch.Tensor
) -> torch.Tensor:
    return torch.softmax(model(x), dim=1).gather(1, y[:, None]).squeeze(1)


def _optimizer(model, schedule: TrainingSchedule, epoch: int) -> MomentumSGD:
    return MomentumSGD(
        model.parameters(),
        lr=schedule.lr_at(epoch),
        weight_decay=schedule.weight_decay,
        momentum=schedule.momentum,
    )


def _check(loss: torch.Tensor, epoch: int) -> None:
    if not torch.isfinite(loss):
        raise TrainingDiverged(f"GAN loss became {loss.item()}", epoch)


def gan_pretrain(
    train: ImageSet,
    n_classes: Mapping[str, int],
    rng: np.random.Generator,
    params: GanParams = GanParams(),
    ae_schedule: TrainingSchedule = AUTOENCODER_SCHEDULE,
    clf_schedule: TrainingSchedule = CLASSIFIER_SCHEDULE,
) -> tuple[AutoencoderModel, ClassifierModel, ClassifierModel]:
    """
    Joint warm-up: autoencoder on reconstruction, both classifiers on real
    images plus the true class of the current reconstructions.
    """
    x_all = images_to_tensor(train.images)
    y_keep = torch.from_numpy(train.labels(params.keep))
    y_hide = torch.from_numpy(train.labels(params.hide))
    with seeded_torch(torch_seed_from(rng)):
        ae = AutoencoderModel(resolution=train.images.shape[1])
        keep = ClassifierModel(n_classes[params.keep], ae.resolution)
        hide = ClassifierModel(n_classes[params.hide], ae.resolution)
        opt_ae = _optimizer(ae, ae_schedule, 0)
        opt_clf = _optimizer(torch.nn.ModuleList([keep, hide]), clf_schedule, 0)
        for epoch in range(params.pretrain_epochs):
            opt_ae.set_lr(ae_schedule.lr_at(epoch))
            opt_clf.set_lr(clf_schedule.lr_at(epoch))
            for m in (ae, keep, hide):
                m.train()
            order = rng.permutation(len(train))
            for start in range(0, len(train), params.batch_size):
                idx = torch.from_numpy(order[start : start + params.batch_size])
                x = x_all[idx]
                opt_ae.zero_grad()
                recon = ae(x)
                loss_ae = F.mse_loss(recon, x)
                _check(loss_ae, epoch)
                loss_ae.backward()
                opt_ae.step()

                gen = recon.detach().clamp(0.0, 1.0)
                both = torch.cat([x, gen])
                opt_clf.zero_grad()
                loss_clf = F.cross_entropy(
                    keep(both), torch.cat([y_keep[idx], y_keep[idx]])
                ) + F.cross_entropy(hide(both), torch.cat([y_hide[idx], y_hide[idx]]))
                _check(loss_clf, epoch)
                loss_clf.backward()
                opt_clf.step()
    for m in (ae, keep, hide):
        m.eval()
    return ae, keep, hide


def gan_train(
    autoencoder: AutoencoderModel,
    classifier_keep: ClassifierModel,
    classifier_hide: ClassifierModel,
    train: ImageSet,
    rng: np.random.Generator,
    params: GanParams = GanParams(),
    ae_schedule: TrainingSchedule = AUTOENCODER_SCHEDULE,
    clf_schedule: TrainingSchedule = CLASSIFIER_SCHEDULE,
) -> tuple[AutoencoderModel, GanReport]:
    """
    Adversarial phase on copies of the given models.

    Each batch first updates the classifiers on real and generated images
    with true labels, then the generator on ``log(1 - D)`` plus
    ``recon_weight`` times the reconstruction L2 loss.

    Returns:
        The trained generator and a report holding the per-epoch losses;
        accuracies are filled in by :func:`gan_evaluate`.
    """
    gen = copy.deepcopy(autoencoder)
    keep = copy.deepcopy(classifier_keep)
    hide = copy.deepcopy(classifier_hide)
    x_all = images_to_tensor(train.images)
    y_keep = torch.from_numpy(train.labels(params.keep))
    y_hide = torch.from_numpy(train.labels(params.hide))
    report = GanReport(np.nan, np.nan, np.nan, np.nan)

    with seeded_torch(torch_seed_from(rng)):
        opt_g = _optimizer(gen, ae_schedule, 0)
        opt_d = _optimizer(torch.nn.ModuleList([keep, hide]), clf_schedule, 0)
        for epoch in range(params.epochs):
            opt_g.set_lr(ae_schedule.lr_at(epoch))
            opt_d.set_lr(clf_schedule.lr_at(epoch))
            order = rng.permutation(len(train))
            g_total = d_total = 0.0
            n_batches = 0
            for start in range(0, len(train), params.batch_size):
                idx = torch.from_numpy(order[start : start + params.batch_size])
                x = x_all[idx]
                yk, yh = y_keep[idx], y_hide[idx]

                # discriminator: both classifiers learn true labels
                keep.train()
                hide.train()
                fake = gen(x).detach().clamp(0.0, 1.0)
                both = torch.cat([x, fake])
                opt_d.zero_grad()
                loss_d = F.cross_entropy(keep(both), torch.cat([yk, yk]))
                loss_d = loss_d + F.cross_entropy(hide(both), torch.cat([yh, yh]))
                _check(loss_d, epoch)
                loss_d.backward()
                opt_d.step()

                # generator against the frozen composition
                keep.eval()
                hide.eval()
                gen.train()
                opt_g.zero_grad()
                out = gen(x)
                shown = out.clamp(0.0, 1.0)
                d = discriminator_score(
                    _true_prob(keep, shown, yk), _true_prob(hide, shown, yh)
                )
                recon = F.mse_loss(out, x)
                loss_g = generator_adversarial_loss(d) + params.recon_weight * recon
                _check(loss_g, epoch)
                loss_g.backward()
                # only the generator steps here; classifier grads are discarded
                opt_d.zero_grad()
                opt_g.step()

                g_total += loss_g.item()
                d_total += loss_d.item()
                n_batches += 1
            report.generator_loss.append(g_total / max(n_batches, 1))
            report.discriminator_loss.append(d_total / max(n_batches, 1))
            if epoch % 10 == 0:
                logger.info(
                    "gan epoch %d: G %.4f D %.4f",
                    epoch,
                    report.generator_loss[-1],
                    report.discriminator_loss[-1],
                )
    gen.eval()
    return gen, report


def gan_evaluate(
    generator: AutoencoderModel,
    classifiers: Mapping[str, ClassifierModel],
    train: ImageSet,
    test: ImageSet,
    n_classes: Mapping[str, int],
    rng: np.random.Generator,
    report: GanReport | None = None,
    schedule: TrainingSchedule = CLASSIFIER_SCHEDULE,
) -> GanReport:
    """
    Accuracy on generated test images, before and after adaptation.

    No adaptation: the given (pre-trained) classifiers. Adapted: fresh
    classifiers trained on the training images plus their generated versions.
    """
    gen_test = reconstruct(generator, test.images)
    gen_train = reconstruct(generator, train.images)
    pool = ImageSet.concat([train, train.with_images(gen_train)])
    no_adapt = {
        t: accuracy(classifiers[t], gen_test, test.labels(t))
        for t in ("stimulus", "subject")
    }
    adapted = {}
    for task in ("stimulus", "subject"):
        model, _ = train_classifier(
            pool.images, pool.labels(task), n_classes[task], schedule, rng
        )
        adapted[task] = accuracy(model, gen_test, test.labels(task))
    out = report if report is not None else GanReport(np.nan, np.nan, np.nan, np.nan)
    out.stim_no_adapt = no_adapt["stimulus"]
    out.sub_no_adapt = no_adapt["subject"]
    out.stim_adapt = adapted["stimulus"]
    out.sub_adapt = adapted["subject"]
    return out
