"""Utility functions for gazemask."""

import contextlib
import hashlib
import json
from pathlib import Path
from typing import Any, Iterator

import numpy as np
import torch

_SEED_MODULUS = 2**63 - 1


def derive_seed(root: int, *parts: Any) -> int:
    """
    Derive a child seed from a root seed and a path of labels.

    Every stage of an experiment draws its randomness from
    ``derive_seed(config.seed, "stage-name", ...)`` so that stages can be
    re-run independently (resume) and still see the same streams.

    Args:
        root: Root seed of the experiment.
        *parts: Stage names, indices, anything with a stable ``repr``.

    Returns:
        A non-negative 63-bit integer seed.
    """
    payload = json.dumps([int(root), *[repr(p) for p in parts]]).encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "little") % _SEED_MODULUS


def make_rng(root: int, *parts: Any) -> np.random.Generator:
    """Return a numpy Generator seeded by :func:`derive_seed`."""
    return np.random.default_rng(derive_seed(root, *parts))


def torch_seed_from(rng: np.random.Generator) -> int:
    """Draw a torch-compatible seed from a numpy Generator."""
    return int(rng.integers(0, 2**62))


@contextlib.contextmanager
def seeded_torch(seed: int) -> Iterator[None]:
    """
    Run a block with torch's global CPU RNG seeded, restoring it afterwards.

    Weight initialization and dropout draw from the global generator; forking
    it keeps one model's training from shifting another's random stream.
    """
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        yield


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str | Path) -> str:
    """Hash a file in chunks."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def resolve_path(path: str | Path) -> Path:
    """
    Resolve path to absolute path.

    Args:
        path: Path to resolve

    Returns:
        Absolute Path object
    """
    return Path(path).resolve()


def ensure_dir(path: str | Path) -> Path:
    """Create ``path`` (and parents) if missing and return it."""
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
