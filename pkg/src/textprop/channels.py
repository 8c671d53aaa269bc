"""Image loading, color-channel decomposition, and pyramid levels.

The proposal pipeline runs the same segmentation machinery over several
grayscale rasters per input image: the R, G and B planes, the gray (luma)
plane, and half-resolution versions of each.  This module produces those
rasters and records the scale factor needed to map coordinates measured on
a downscaled raster back into native image coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

CHANNEL_IDS = "RGBI"
PYRAMID_LEVELS = (1, 2)

# Rec. 601 luma weights.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class ImageFormatError(ValueError):
    """File exists but cannot be decoded as a supported raster image."""


@dataclass(frozen=True)
class ChannelImage:
    """One grayscale raster the pipeline segments independently.

    ``scale`` converts this level's pixel coordinates into level-1 (native)
    coordinates by multiplication; it is 1.0 at level 1 and 2.0 at level 2.
    """

    channel: str
    level: int
    raster: np.ndarray
    scale: float

    def __post_init__(self):
        if self.channel not in CHANNEL_IDS:
            raise ValueError(f"unknown channel id {self.channel!r}")
        if self.level not in PYRAMID_LEVELS:
            raise ValueError(f"unsupported pyramid level {self.level}")
        if self.raster.ndim != 2 or self.raster.dtype != np.uint8:
            raise ValueError("raster must be a 2-D uint8 array")

    @property
    def shape(self):
        return self.raster.shape


def load_image(path) -> np.ndarray:
    """Decode a PNG/JPEG/PPM file into an (H, W, 3) uint8 RGB array.

    Grayscale and palette images are expanded to RGB.  A missing file
    raises FileNotFoundError; an undecodable or truncated file raises
    ImageFormatError.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    try:
        with Image.open(path) as im:
            im.load()
            rgb = im.convert("RGB")
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"unsupported image format: {path}") from exc
    except (OSError, SyntaxError) as exc:
        raise ImageFormatError(f"cannot decode image {path}: {exc}") from exc
    arr = np.asarray(rgb, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ImageFormatError(f"decoded image has unexpected shape {arr.shape}")
    return arr


def luma(rgb: np.ndarray) -> np.ndarray:
    """Rec. 601 gray plane of an (H, W, 3) uint8 image, rounded to uint8."""
    rgb = _check_rgb(rgb)
    w = LUMA_WEIGHTS
    gray = w[0] * rgb[:, :, 0] + w[1] * rgb[:, :, 1] + w[2] * rgb[:, :, 2]
    return np.rint(gray).astype(np.uint8)


def halve(raster: np.ndarray) -> np.ndarray:
    """Downscale a 2-D uint8 raster by 2x with a 2x2 box filter.

    Odd dimensions are handled by replicating the last row/column, so the
    output has ceil(H/2) x ceil(W/2) pixels.
    """
    raster = np.asarray(raster)
    if raster.ndim != 2:
        raise ValueError("expected a 2-D raster")
    h, w = raster.shape
    if h == 0 or w == 0:
        raise ValueError("empty raster")
    padded = np.pad(raster.astype(np.float64), ((0, h % 2), (0, w % 2)), mode="edge")
    ph, pw = padded.shape
    blocks = padded.reshape(ph // 2, 2, pw // 2, 2).mean(axis=(1, 3))
    return np.rint(blocks).astype(np.uint8)


def canonical_channels(channels) -> tuple:
    """Validate channel ids and return them deduplicated in R,G,B,I order."""
    chans = tuple(channels)
    if not chans:
        raise ValueError("channel set must not be empty")
    for c in chans:
        if c not in CHANNEL_IDS:
            raise ValueError(f"unknown channel id {c!r}")
    return tuple(c for c in CHANNEL_IDS if c in chans)


def canonical_levels(levels) -> tuple:
    levs = tuple(int(l) for l in levels)
    if not levs:
        raise ValueError("level set must not be empty")
    for l in levs:
        if l not in PYRAMID_LEVELS:
            raise ValueError(f"unsupported pyramid level {l}")
    return tuple(l for l in PYRAMID_LEVELS if l in levs)


def decompose(rgb, channels=CHANNEL_IDS, levels=PYRAMID_LEVELS) -> list:
    """Split an RGB image into per-channel, per-level grayscale rasters.

    Returns ChannelImage entries ordered channel-major (R, G, B, I) with
    level 1 before level 2.  The decomposition is a pure function of the
    pixel data.
    """
    rgb = _check_rgb(rgb)
    chans = canonical_channels(channels)
    levs = canonical_levels(levels)
    planes = {}
    for c in chans:
        if c == "I":
            planes[c] = luma(rgb)
        else:
            planes[c] = np.ascontiguousarray(rgb[:, :, CHANNEL_IDS.index(c)])
    out = []
    for c in chans:
        for level in levs:
            if level == 1:
                out.append(ChannelImage(c, 1, planes[c], 1.0))
            else:
                out.append(ChannelImage(c, 2, halve(planes[c]), 2.0))
    return out


def write_pgm(path, labels: np.ndarray):
    """Write a 2-D array as a binary 8-bit PGM (values are taken mod 256)."""
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ValueError("expected a 2-D array")
    data = (labels.astype(np.int64) % 256).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def _check_rgb(rgb) -> np.ndarray:
    arr = np.asarray(rgb)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError("empty image")
    return arr.astype(np.uint8, copy=False)
