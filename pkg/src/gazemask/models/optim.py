"""SGD with momentum and L2-coupled weight decay."""

from typing import Sequence

import torch
from torch.optim import Optimizer

from gazemask.errors import TrainingDiverged


def sgd_step(
    params: Sequence[torch.Tensor],
    grads: Sequence[torch.Tensor],
    lr: float,
    weight_decay: float,
    momentum: float,
    velocity: Sequence[torch.Tensor],
) -> tuple[list[torch.Tensor], list[torch.Tensor]]:
    """
    One in-place update of ``params`` and ``velocity``::

        v <- momentum * v + grad + weight_decay * param
        param <- param - lr * v

    Raises:
        TrainingDiverged: A gradient holds NaN or infinity. Nothing is updated.
        ValueError: Shapes of params, grads and velocity do not line up.
    """
    if not len(params) == len(grads) == len(velocity):
        raise ValueError("params, grads and velocity must have equal length")
    for p, g, v in zip(params, grads, velocity):
        if p.shape != g.shape or p.shape != v.shape:
            raise ValueError(
                f"shape mismatch: param {tuple(p.shape)}, grad {tuple(g.shape)}, "
                f"velocity {tuple(v.shape)}"
            )
        if not torch.isfinite(g).all():
            raise TrainingDiverged("non-finite gradient")
    for p, g, v in zip(params, grads, velocity):
        v.mul_(momentum).add_(g).add_(p, alpha=weight_decay)
        p.sub_(v, alpha=lr)
    return list(params), list(velocity)


class MomentumSGD(Optimizer):
    """
    ``torch.optim`` wrapper around :func:`sgd_step`.

    Velocity buffers live in ``self.state[p]["velocity"]`` and start at zero.
    The learning rate is read from the param group each step so schedules can
    set ``group["lr"]`` between epochs.
    """

    def __init__(
        self, params, lr: float, weight_decay: float = 0.0, momentum: float = 0.0
    ) -> None:
        if lr < 0:
            raise ValueError(f"lr must be >= 0, got {lr}")
        super().__init__(
            params, dict(lr=lr, weight_decay=weight_decay, momentum=momentum)
        )

    def set_lr(self, lr: float) -> None:
        for group in self.param_groups:
            group["lr"] = lr

    @torch.no_grad()
    def step(self, closure=None):
        loss = None
        if closure is not None:
            with torch.enable_grad():
                loss = closure()
        for group in self.param_groups:
            params = [p for p in group["params"] if p.grad is not None]
            if not params:
                continue
            velocity = []
            for p in params:
                state = self.state[p]
                if "velocity" not in state:
                    state["velocity"] = torch.zeros_like(p)
                velocity.append(state["velocity"])
            sgd_step(
                params,
                [p.grad for p in params],
                group["lr"],
                group["weight_decay"],
                group["momentum"],
                velocity,
            )
        return loss
