"""Histogram-of-oriented-gradients feature for GPR cubes.

Per-slice HOG descriptors (cell-wise unsigned orientation histograms of
gradient magnitude, deliberately without block normalization) are averaged
across the slices of an (18, 18, 18) cube: time-cross-track slices for the
cross-track feature, time-down-track slices for the down-track feature.
"""

from __future__ import annotations

import numpy as np

from ..errors import DataError
from .base import FeatureKind, FeatureVector

__all__ = ["hog_descriptor", "gprhog_feature"]


def hog_descriptor(image: np.ndarray, cell: int = 6, n_bins: int = 9) -> np.ndarray:
    """Unnormalized HOG of a 2-D image: per cell, gradient magnitudes voted
    into n_bins unsigned orientation bins.  Cells tile the image; rows or
    columns beyond the last full cell are ignored."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2 or min(image.shape) < cell:
        raise DataError(f"image {image.shape} smaller than one {cell}x{cell} cell")
    gr, gc = np.gradient(image)
    mag = np.hypot(gr, gc)
    ang = np.mod(np.arctan2(gr, gc), np.pi)
    bins = np.minimum((ang / (np.pi / n_bins)).astype(np.intp), n_bins - 1)

    rows, cols = image.shape[0] // cell, image.shape[1] // cell
    out = np.zeros((rows, cols, n_bins))
    for r in range(rows):
        for c in range(cols):
            sl = (slice(r * cell, (r + 1) * cell), slice(c * cell, (c + 1) * cell))
            out[r, c] = np.bincount(bins[sl].ravel(), weights=mag[sl].ravel(),
                                    minlength=n_bins)
    return out.ravel()


def gprhog_feature(cube, cell: int = 6, n_bins: int = 9) -> tuple[FeatureVector, FeatureVector]:
    """Slice-averaged HOG pair (H_tx, H_ty) of an (18, 18, 18) cube.

    H_tx averages HOGs of time-down-track slices over cross-track positions;
    H_ty averages HOGs of time-cross-track slices over down-track positions.
    """
    samples = cube.samples if hasattr(cube, "samples") else np.asarray(cube, dtype=np.float64)
    if samples.ndim != 3 or samples.shape != (18, 18, 18):
        raise DataError(f"gprHOG expects an (18, 18, 18) cube, got {samples.shape}")
    h_tx = np.mean([hog_descriptor(samples[:, i, :], cell, n_bins)
                    for i in range(samples.shape[1])], axis=0)
    h_ty = np.mean([hog_descriptor(samples[:, :, i], cell, n_bins)
                    for i in range(samples.shape[2])], axis=0)
    return (
        FeatureVector(h_tx, FeatureKind.HOG_TX),
        FeatureVector(h_ty, FeatureKind.HOG_TY),
    )
