"""
Versioned binary container for model checkpoints and array stores.

Layout (all integers little-endian)::

    magic        4 bytes   b"GZMK"
    version      uint16
    arch_id      uint16 length + UTF-8
    n_classes    int32
    seed         uint64
    epoch        uint32
    meta         uint32 length + UTF-8 JSON (sorted keys)
    n_tensors    uint32
    per tensor:
      name       uint16 length + UTF-8
      dtype      uint8 code (see _DTYPES)
      ndim       uint8
      dims       ndim x uint64
      data       C-order little-endian bytes

Model tensors follow ``state_dict()`` order. Saving the same content twice
gives identical bytes.
"""

import io
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Any, Mapping

import numpy as np
import torch
from torch import nn

from gazemask.errors import DataError
from gazemask.models.architectures import build_model
from gazemask.utils import sha256_bytes

MAGIC = b"GZMK"
FORMAT_VERSION = 1

_DTYPES: dict[int, np.dtype] = {
    0: np.dtype("<f4"),
    1: np.dtype("<f8"),
    2: np.dtype("<i8"),
    3: np.dtype("u1"),
    4: np.dtype("<i4"),
}
_CODES = {dt: code for code, dt in _DTYPES.items()}


class CheckpointError(DataError):
    """Raised for unreadable, truncated or foreign container files."""


@dataclass
class Container:
    arch_id: str
    tensors: dict[str, np.ndarray]
    n_classes: int = 0
    seed: int = 0
    epoch: int = 0
    meta: dict[str, Any] = field(default_factory=dict)


def _pack_str(fmt: str, text: str) -> bytes:
    raw = text.encode("utf-8")
    return struct.pack(fmt, len(raw)) + raw


def _tensor_bytes(name: str, array: np.ndarray) -> bytes:
    arr = np.asarray(array)
    if arr.dtype == np.bool_:
        arr = arr.astype(np.uint8)
    dtype = arr.dtype.newbyteorder("<") if arr.dtype.itemsize > 1 else arr.dtype
    if dtype not in _CODES:
        raise TypeError(f"unsupported dtype {arr.dtype} for tensor {name!r}")
    arr = np.ascontiguousarray(arr, dtype=dtype)
    head = _pack_str("<H", name)
    head += struct.pack("<BB", _CODES[dtype], arr.ndim)
    head += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    return head + arr.tobytes(order="C")


def tensor_payload(tensors: Mapping[str, np.ndarray]) -> bytes:
    """Serialized tensor section (count + tensors) without the header."""
    parts = [struct.pack("<I", len(tensors))]
    parts.extend(_tensor_bytes(name, arr) for name, arr in tensors.items())
    return b"".join(parts)


def dump_container(container: Container) -> bytes:
    out = [MAGIC, struct.pack("<H", FORMAT_VERSION)]
    out.append(_pack_str("<H", container.arch_id))
    out.append(
        struct.pack("<iQI", container.n_classes, container.seed, container.epoch)
    )
    meta = json.dumps(container.meta, sort_keys=True, separators=(",", ":"))
    out.append(_pack_str("<I", meta))
    out.append(tensor_payload(container.tensors))
    return b"".join(out)


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointError("truncated container")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self, fmt: str) -> str:
        (length,) = self.unpack(fmt)
        return self.take(length).decode("utf-8")


def parse_container(data: bytes) -> Container:
    reader = _Reader(data)
    if reader.take(4) != MAGIC:
        raise CheckpointError("not a gazemask container (bad magic)")
    (version,) = reader.unpack("<H")
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported container version {version} (expected {FORMAT_VERSION})"
        )
    arch_id = reader.string("<H")
    n_classes, seed, epoch = reader.unpack("<iQI")
    meta = json.loads(reader.string("<I"))
    (count,) = reader.unpack("<I")
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        name = reader.string("<H")
        code, ndim = reader.unpack("<BB")
        if code not in _DTYPES:
            raise CheckpointError(f"unknown dtype code {code} for tensor {name!r}")
        shape = reader.unpack(f"<{ndim}Q") if ndim else ()
        dtype = _DTYPES[code]
        n_bytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        arr = np.frombuffer(reader.take(n_bytes), dtype=dtype).reshape(shape)
        tensors[name] = arr.astype(dtype.newbyteorder("="), copy=True)
    if reader.pos != len(data):
        raise CheckpointError("trailing bytes after the last tensor")
    return Container(arch_id, tensors, n_classes, seed, epoch, meta)


def save_container(container: Container, dest: str | Path | IO[bytes]) -> None:
    data = dump_container(container)
    if isinstance(dest, (str, Path)):
        Path(dest).parent.mkdir(parents=True, exist_ok=True)
        Path(dest).write_bytes(data)
    else:
        dest.write(data)


def load_container(source: str | Path | IO[bytes]) -> Container:
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = source.read()
    return parse_container(data)


def model_tensors(model: nn.Module) -> dict[str, np.ndarray]:
    return {
        name: t.detach().cpu().numpy().copy() for name, t in model.state_dict().items()
    }


def parameter_hash(model: nn.Module) -> str:
    """sha256 of the model's serialized tensors (header excluded)."""
    return sha256_bytes(tensor_payload(model_tensors(model)))


def save_model(
    model: nn.Module,
    dest: str | Path | IO[bytes],
    seed: int = 0,
    epoch: int = 0,
    meta: Mapping[str, Any] | None = None,
) -> None:
    """Write ``model`` (an architecture from :mod:`gazemask.models`) to ``dest``."""
    full_meta = {"resolution": int(model.resolution), **dict(meta or {})}
    save_container(
        Container(
            model.arch_id,
            model_tensors(model),
            n_classes=int(model.n_classes),
            seed=seed,
            epoch=epoch,
            meta=full_meta,
        ),
        dest,
    )


def load_model(source: str | Path | IO[bytes]) -> tuple[nn.Module, Container]:
    """Rebuild a model from a checkpoint; returns it with the parsed header."""
    container = load_container(source)
    resolution = int(container.meta.get("resolution", 64))
    try:
        model = build_model(container.arch_id, container.n_classes, resolution)
    except ValueError as e:
        raise CheckpointError(str(e)) from e
    state = {k: torch.from_numpy(v) for k, v in container.tensors.items()}
    try:
        model.load_state_dict(state, strict=True)
    except RuntimeError as e:
        raise CheckpointError(f"checkpoint does not match {container.arch_id}: {e}")
    model.eval()
    return model, container


def model_bytes(model: nn.Module, **kwargs: Any) -> bytes:
    buf = io.BytesIO()
    save_model(model, buf, **kwargs)
    return buf.getvalue()
