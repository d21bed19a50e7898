"""
Network architectures and the modules built from them.

An :class:`ArchitectureSpec` is a flat list of :class:`LayerSpec`.
:func:`build_module` walks it while tracking the activation shape, so the
same spec yields both the ``torch.nn`` stack and its parameter count.

Geometry conventions:

- convolutions use same padding (``kernel // 2``); stride is explicit
- max pooling is 2x2 with stride 2
- transposed convolutions use stride 2, padding ``kernel // 2`` and
  ``output_padding=1`` so each one exactly doubles the spatial size
- the activation flattens in ``(channel, row, column)`` order, so bottleneck
  value ``c * 16 + r * 4 + w`` is channel ``c`` at row ``r``, column ``w``
  for the 4x4 autoencoder bottleneck
"""

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
import torch
from torch import nn

from gazemask.errors import DataError

LayerKind = Literal[
    "conv",
    "transposed-conv",
    "fully-connected",
    "relu",
    "maxpool",
    "dropout",
    "softmax",
]

IMAGE_RESOLUTION = 64
BOTTLENECK_SIZE = 4096
ACTION_SIZE = 4096


class ShapeError(DataError, ValueError):
    """Raised when an input does not match the shape a model expects."""


@dataclass(frozen=True)
class LayerSpec:
    kind: LayerKind
    out: int | None = None
    kernel: int | None = None
    stride: int = 1
    p: float | None = None


@dataclass(frozen=True)
class ArchitectureSpec:
    """Layer list plus the ``(channels, height, width)`` input it expects."""

    name: str
    layers: tuple[LayerSpec, ...]
    input_shape: tuple[int, int, int] = (3, IMAGE_RESOLUTION, IMAGE_RESOLUTION)

    @property
    def head_softmax(self) -> bool:
        return bool(self.layers) and self.layers[-1].kind == "softmax"


def conv(out: int, kernel: int, stride: int = 1) -> LayerSpec:
    return LayerSpec("conv", out=out, kernel=kernel, stride=stride)


def tconv(out: int, kernel: int) -> LayerSpec:
    return LayerSpec("transposed-conv", out=out, kernel=kernel, stride=2)


def fc(out: int) -> LayerSpec:
    return LayerSpec("fully-connected", out=out)


RELU = LayerSpec("relu")
POOL = LayerSpec("maxpool", kernel=2, stride=2)
SOFTMAX = LayerSpec("softmax")


def dropout(p: float = 0.5) -> LayerSpec:
    return LayerSpec("dropout", p=p)


def _block(out: int, kernel: int) -> tuple[LayerSpec, LayerSpec, LayerSpec]:
    return conv(out, kernel), RELU, POOL


def bottleneck_size(resolution: int = IMAGE_RESOLUTION) -> int:
    """One DQL action per autoencoder bottleneck value (4096 at 64x64)."""
    return 256 * (resolution // 16) ** 2


def _input_shape(resolution: int) -> tuple[int, int, int]:
    if resolution < 16 or resolution % 16:
        raise ValueError(f"resolution must be a multiple of 16, got {resolution}")
    return (3, resolution, resolution)


def encoder_spec(resolution: int = IMAGE_RESOLUTION) -> ArchitectureSpec:
    """Three conv/ReLU/pool blocks, then a stride-2 256x5x5 conv with ReLU."""
    return ArchitectureSpec(
        "encoder",
        (
            *_block(32, 7),
            *_block(64, 7),
            *_block(128, 5),
            conv(256, 5, stride=2),
            RELU,
        ),
        _input_shape(resolution),
    )


def decoder_spec(resolution: int = IMAGE_RESOLUTION) -> ArchitectureSpec:
    side = resolution // 16
    return ArchitectureSpec(
        "decoder",
        (
            tconv(128, 5),
            RELU,
            tconv(64, 5),
            RELU,
            tconv(32, 7),
            RELU,
            tconv(3, 7),
        ),
        (256, side, side),
    )


def classifier_spec(
    n_classes: int, resolution: int = IMAGE_RESOLUTION
) -> ArchitectureSpec:
    if n_classes < 2:
        raise ValueError(f"a classifier needs at least 2 classes, got {n_classes}")
    return ArchitectureSpec(
        f"classifier-{n_classes}",
        (
            *_block(32, 7),
            *_block(64, 7),
            *_block(128, 5),
            *_block(256, 5),
            dropout(0.5),
            fc(512),
            RELU,
            fc(n_classes),
            SOFTMAX,
        ),
        _input_shape(resolution),
    )


def dql_spec(resolution: int = IMAGE_RESOLUTION) -> ArchitectureSpec:
    return ArchitectureSpec(
        "dql",
        (
            *_block(32, 7),
            *_block(64, 7),
            *_block(128, 5),
            fc(bottleneck_size(resolution)),
        ),
        _input_shape(resolution),
    )


def output_shape(layer: LayerSpec, shape: tuple[int, ...]) -> tuple[int, ...]:
    """Activation shape after ``layer`` for an input of ``shape`` (no batch axis)."""
    kind = layer.kind
    if kind == "conv":
        c, h, w = shape
        pad = layer.kernel // 2
        h = (h + 2 * pad - layer.kernel) // layer.stride + 1
        w = (w + 2 * pad - layer.kernel) // layer.stride + 1
        return (layer.out, h, w)
    if kind == "transposed-conv":
        return (layer.out, 2 * shape[1], 2 * shape[2])
    if kind == "fully-connected":
        return (layer.out,)
    if kind == "maxpool":
        return (shape[0], shape[1] // 2, shape[2] // 2)
    if kind in ("relu", "dropout", "softmax"):
        return shape
    raise ValueError(f"unknown layer kind {kind!r}")


def build_layer(
    layer: LayerSpec, shape: tuple[int, ...]
) -> tuple[nn.Module, tuple[int, ...]]:
    """Build one layer for an input of ``shape`` (no batch axis)."""
    out_shape = output_shape(layer, shape)
    kind = layer.kind
    if kind == "conv":
        pad = layer.kernel // 2
        module: nn.Module = nn.Conv2d(
            shape[0], layer.out, layer.kernel, stride=layer.stride, padding=pad
        )
    elif kind == "transposed-conv":
        pad = layer.kernel // 2
        module = nn.ConvTranspose2d(
            shape[0], layer.out, layer.kernel, stride=2, padding=pad, output_padding=1
        )
    elif kind == "fully-connected":
        linear = nn.Linear(int(np.prod(shape)), layer.out)
        module = nn.Sequential(nn.Flatten(), linear) if len(shape) > 1 else linear
    elif kind == "relu":
        module = nn.ReLU()
    elif kind == "maxpool":
        module = nn.MaxPool2d(2, 2)
    elif kind == "dropout":
        module = nn.Dropout(layer.p if layer.p is not None else 0.5)
    else:
        module = nn.Softmax(dim=1)
    return module, out_shape


def init_weights(module: nn.Module) -> None:
    """Fan-in scaled uniform weights, zero biases."""
    for m in module.modules():
        if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d, nn.Linear)):
            nn.init.kaiming_uniform_(m.weight, nonlinearity="relu")
            nn.init.zeros_(m.bias)


def build_module(spec: ArchitectureSpec) -> tuple[nn.Sequential, tuple[int, ...]]:
    """
    Build the layer stack of ``spec``.

    A terminal softmax is left out of the stack; callers apply it (or a
    log-softmax loss) on the returned logits.

    Returns:
        ``(module, output_shape)``
    """
    layers = spec.layers[:-1] if spec.head_softmax else spec.layers
    shape: tuple[int, ...] = spec.input_shape
    modules: list[nn.Module] = []
    for layer in layers:
        module, shape = build_layer(layer, shape)
        modules.append(module)
    net = nn.Sequential(*modules)
    init_weights(net)
    return net, shape


def count_parameters(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())


def _check_images(x: torch.Tensor, shape: Sequence[int]) -> None:
    if x.ndim != 4 or tuple(x.shape[1:]) != tuple(shape):
        raise ShapeError(
            f"expected a batch of shape (N, {', '.join(map(str, shape))}), "
            f"got {tuple(x.shape)}"
        )


class AutoencoderModel(nn.Module):
    """Convolutional autoencoder with a ``256 x (res/16) x (res/16)`` bottleneck."""

    arch_id = "autoencoder"

    def __init__(self, resolution: int = IMAGE_RESOLUTION) -> None:
        super().__init__()
        self.resolution = resolution
        self.n_classes = 0
        self.encoder, self.bottleneck_shape = build_module(encoder_spec(resolution))
        self.decoder, _ = build_module(decoder_spec(resolution))

    @property
    def bottleneck_size(self) -> int:
        return int(np.prod(self.bottleneck_shape))

    def encode(self, x: torch.Tensor) -> torch.Tensor:
        """``(N, 3, H, W)`` images to flat ``(N, bottleneck_size)`` activations."""
        _check_images(x, (3, self.resolution, self.resolution))
        return self.encoder(x).flatten(1)

    def decode(self, b: torch.Tensor) -> torch.Tensor:
        """Flat activations to unclamped ``(N, 3, H, W)`` images."""
        if b.ndim != 2 or b.shape[1] != self.bottleneck_size:
            raise ShapeError(
                f"expected bottleneck of shape (N, {self.bottleneck_size}), "
                f"got {tuple(b.shape)}"
            )
        return self.decoder(b.reshape(-1, *self.bottleneck_shape))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.decode(self.encode(x))


class ClassifierModel(nn.Module):
    """Four conv blocks, dropout, two fully connected layers; returns logits."""

    arch_id = "classifier"

    def __init__(self, n_classes: int, resolution: int = IMAGE_RESOLUTION) -> None:
        super().__init__()
        self.resolution = resolution
        self.n_classes = n_classes
        self.net, _ = build_module(classifier_spec(n_classes, resolution))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        _check_images(x, (3, self.resolution, self.resolution))
        return self.net(x)


class DqlModel(nn.Module):
    """Deep-Q network: one value per bottleneck flag."""

    arch_id = "dql"

    def __init__(self, resolution: int = IMAGE_RESOLUTION) -> None:
        super().__init__()
        self.resolution = resolution
        self.n_classes = 0
        self.net, (self.n_actions,) = build_module(dql_spec(resolution))
        # untrained agents deactivate nothing
        head = self.net[-1][-1]
        nn.init.zeros_(head.weight)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        _check_images(x, (3, self.resolution, self.resolution))
        return self.net(x)


MODEL_TYPES: dict[str, type[nn.Module]] = {
    AutoencoderModel.arch_id: AutoencoderModel,
    ClassifierModel.arch_id: ClassifierModel,
    DqlModel.arch_id: DqlModel,
}


def build_model(arch_id: str, n_classes: int = 0, resolution: int = IMAGE_RESOLUTION):
    """Instantiate a model by architecture id (used when loading checkpoints)."""
    if arch_id == ClassifierModel.arch_id:
        return ClassifierModel(n_classes, resolution)
    try:
        return MODEL_TYPES[arch_id](resolution)
    except KeyError:
        raise ValueError(
            f"unknown architecture {arch_id!r} (known: {sorted(MODEL_TYPES)})"
        ) from None


def spec_parameter_count(spec: ArchitectureSpec) -> int:
    """Parameter count of ``spec`` computed from the layer list alone."""
    total = 0
    shape: tuple[int, ...] = spec.input_shape
    for layer in spec.layers:
        if layer.kind in ("conv", "transposed-conv"):
            total += layer.out * shape[0] * layer.kernel**2 + layer.out
        elif layer.kind == "fully-connected":
            total += layer.out * int(np.prod(shape)) + layer.out
        shape = output_shape(layer, shape)
    return total


def images_to_tensor(
    images: np.ndarray, dtype: torch.dtype = torch.float32
) -> torch.Tensor:
    """``(N, H, W, 3)`` or ``(H, W, 3)`` numpy images to an NCHW tensor."""
    arr = np.asarray(images)
    if arr.ndim == 3:
        arr = arr[None]
    if arr.ndim != 4 or arr.shape[-1] != 3:
        raise ShapeError(f"expected images of shape (N, H, W, 3), got {arr.shape}")
    return torch.from_numpy(np.ascontiguousarray(arr.transpose(0, 3, 1, 2))).to(dtype)


def tensor_to_images(x: torch.Tensor) -> np.ndarray:
    """NCHW tensor back to ``(N, H, W, 3)`` float32 numpy images."""
    return x.detach().permute(0, 2, 3, 1).cpu().numpy().astype(np.float32)
