"""Per-region similarity features.

Five scalar descriptors drive the grouping stage: mean gray value inside
the region, mean gray value on its immediate outer boundary, major axis
length, mean stroke width, and mean gradient magnitude on the region
border.  All of them are computed on the raster the region was extracted
from, in that raster's pixel units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

FEATURE_NAMES = (
    "intensity_mean",
    "boundary_intensity_mean",
    "major_axis",
    "stroke_width_mean",
    "border_gradient_mean",
)

# feature-vector column per grouping cue id
CUE_COLUMNS = {"F": 0, "B": 1, "D": 2, "S": 3, "G": 4}

_BOX8 = np.ones((3, 3), bool)


@dataclass(frozen=True)
class RegionFeatures:
    intensity_mean: float
    boundary_intensity_mean: float
    major_axis: float
    stroke_width_mean: float
    border_gradient_mean: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES], np.float64)


def gradient_magnitude(raster: np.ndarray) -> np.ndarray:
    """Central-difference gradient magnitude with replicated borders."""
    r = np.asarray(raster, np.float64)
    if r.ndim != 2:
        raise ValueError("raster must be 2-D")
    p = np.pad(r, 1, mode="edge")
    gx = (p[1:-1, 2:] - p[1:-1, :-2]) / 2.0
    gy = (p[2:, 1:-1] - p[:-2, 1:-1]) / 2.0
    return np.hypot(gx, gy)


def compute_features(region, raster, grad: np.ndarray | None = None) -> RegionFeatures:
    """Feature vector of one region on its source raster.

    ``grad`` may carry a precomputed gradient_magnitude(raster) so batch
    callers pay for it once.
    """
    raster = np.asarray(raster)
    if raster.ndim != 2:
        raise ValueError("raster must be 2-D")
    h, w = raster.shape
    pix = np.asarray(region.pixels)
    if pix.ndim != 2 or pix.shape[1] != 2 or pix.shape[0] == 0:
        raise ValueError("region must have an (N, 2) pixel array")
    xs = pix[:, 0].astype(np.int64)
    ys = pix[:, 1].astype(np.int64)
    if xs.min() < 0 or ys.min() < 0 or xs.max() >= w or ys.max() >= h:
        raise ValueError("region pixels fall outside the raster")
    if grad is None:
        grad = gradient_magnitude(raster)

    vals = raster[ys, xs].astype(np.float64)
    intensity = float(vals.mean())

    # local mask with a 1-pixel margin around the bounding box
    x0, y0 = int(xs.min()), int(ys.min())
    mask = np.zeros((int(ys.max()) - y0 + 3, int(xs.max()) - x0 + 3), bool)
    mask[ys - y0 + 1, xs - x0 + 1] = True

    boundary = _boundary_intensity(mask, raster, x0, y0, intensity)
    major = _major_axis(xs, ys)
    stroke = _stroke_width(mask)
    border_grad = _border_gradient(mask, grad, x0, y0)
    return RegionFeatures(intensity, boundary, major, stroke, border_grad)


def feature_matrix(regions, raster) -> np.ndarray:
    """(n, 5) float64 feature matrix for a region list on one raster."""
    grad = gradient_magnitude(raster)
    out = np.empty((len(regions), 5), np.float64)
    for i, region in enumerate(regions):
        out[i] = compute_features(region, raster, grad).as_array()
    return out


def _boundary_intensity(mask, raster, x0, y0, fallback):
    """Mean raster value over 8-connected outer boundary pixels, clipped to
    the raster; empty boundary falls back to the region's own mean."""
    h, w = raster.shape
    outer = ndimage.binary_dilation(mask, structure=_BOX8) & ~mask
    oy, ox = np.nonzero(outer)
    gx = ox + x0 - 1
    gy = oy + y0 - 1
    keep = (gx >= 0) & (gx < w) & (gy >= 0) & (gy < h)
    if not keep.any():
        return fallback
    return float(raster[gy[keep], gx[keep]].astype(np.float64).mean())


def _major_axis(xs, ys):
    """Length of the major axis of the pixel-mass ellipse.

    Second moments get the 1/12 single-pixel extent term, so an isolated
    pixel measures 1 and an axis-aligned w x h block measures max(w, h).
    """
    mx = xs.mean()
    my = ys.mean()
    dx = xs - mx
    dy = ys - my
    cxx = (dx * dx).mean() + 1.0 / 12.0
    cyy = (dy * dy).mean() + 1.0 / 12.0
    cxy = (dx * dy).mean()
    lam = (cxx + cyy) / 2.0 + np.sqrt(((cxx - cyy) / 2.0) ** 2 + cxy * cxy)
    return float(2.0 * np.sqrt(3.0 * lam))


def _stroke_width(mask):
    """Mean of (2 d - 1) over ridge pixels of the in-region distance field;
    a bar of odd width k measures exactly k."""
    edt = ndimage.distance_transform_edt(mask)
    ridge = (ndimage.maximum_filter(edt, size=3) == edt) & mask
    return float((2.0 * edt[ridge] - 1.0).mean())


def _border_gradient(mask, grad, x0, y0):
    """Mean gradient magnitude over region pixels on the region border
    (8-connectivity; raster-edge pixels count as border)."""
    inner = mask & ~ndimage.binary_erosion(mask, structure=_BOX8)
    iy, ix = np.nonzero(inner)
    return float(grad[iy + y0 - 1, ix + x0 - 1].mean())
