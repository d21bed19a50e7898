"""Scanpath representation, image encoding and augmentation."""

from gazemask.codec.augment import AugmentParams, augment, expand_with_augmentations
from gazemask.codec.encode import (
    EncodingParams,
    encode_scanpath,
    pixel_coords,
    rasterize_line,
    to_png,
)
from gazemask.codec.scanpath import GazePoint, InvalidScanpath, Scanpath

__all__ = [
    "AugmentParams",
    "EncodingParams",
    "GazePoint",
    "InvalidScanpath",
    "Scanpath",
    "augment",
    "encode_scanpath",
    "expand_with_augmentations",
    "pixel_coords",
    "rasterize_line",
    "to_png",
]
