"""Spatial edge descriptor on T-scans, plus energy-based depth estimation.

SED works on spatial imagery (fixed-time slices), where threat responses
look circular: a 15x15 patch around the alarm is split into a 3x3 grid of
cells, each cell histograms its rotated-Sobel gradient directions into four
angle bins (pixels whose strongest response stays under the no-edge
threshold count toward the denominator only), and the 36-value descriptors
of 50 consecutive T-scans are averaged.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy import ndimage

from ..errors import DataError
from .base import FeatureKind, FeatureVector
from .edges import SOBEL_KERNELS

__all__ = ["sed_feature", "msek_depths", "SedLabeler"]

_NO_EDGE = 4


class SedLabeler:
    """Caches per-T-scan edge-bin integral images of one volume.

    Labels are the argmax of the four kernel responses, or no-edge when the
    maximum absolute response falls below the threshold; pixels without full
    3x3 support are no-edge.
    """

    def __init__(self, samples: np.ndarray, threshold: float):
        self.samples = np.asarray(samples, dtype=np.float64)
        if self.samples.ndim != 3:
            raise DataError("SED labeling needs a (T, X, Y) volume")
        self.threshold = threshold
        self._integrals: dict[int, np.ndarray] = {}

    def _label_scan(self, t: int) -> np.ndarray:
        scan = self.samples[t]
        resp = np.empty((4,) + scan.shape)
        for k, kernel in enumerate(SOBEL_KERNELS):
            resp[k] = np.abs(ndimage.correlate(scan, kernel, mode="constant"))
        labels = resp.argmax(axis=0).astype(np.int8)
        labels[resp.max(axis=0) < self.threshold] = _NO_EDGE
        labels[0, :] = labels[-1, :] = _NO_EDGE
        labels[:, 0] = labels[:, -1] = _NO_EDGE
        return labels

    def integrals(self, t: int) -> np.ndarray:
        """(4, X+1, Y+1) integral images of the four edge-bin indicators."""
        cached = self._integrals.get(t)
        if cached is not None:
            return cached
        labels = self._label_scan(t)
        X, Y = labels.shape
        out = np.zeros((4, X + 1, Y + 1))
        for b in range(4):
            out[b, 1:, 1:] = np.cumsum(np.cumsum(labels == b, axis=0), axis=1)
        self._integrals[t] = out
        return out

    def cell_histogram(self, t: int, x0: int, y0: int, patch: int, cells: int) -> np.ndarray:
        """(cells*cells*4,) histogram of the patch centered at (x0, y0).

        Out-of-bounds pixels are no-edge; every cell is normalized by its
        full pixel count so padding only dilutes.
        """
        if not 0 <= t < self.samples.shape[0]:
            return np.zeros(cells * cells * 4)
        ii = self.integrals(t)
        X, Y = self.samples.shape[1:]
        side = patch // cells
        x_start = x0 - patch // 2
        y_start = y0 - patch // 2
        hist = np.zeros((cells, cells, 4))
        for cx in range(cells):
            a = np.clip(x_start + cx * side, 0, X)
            b = np.clip(x_start + (cx + 1) * side, 0, X)
            for cy in range(cells):
                c = np.clip(y_start + cy * side, 0, Y)
                d = np.clip(y_start + (cy + 1) * side, 0, Y)
                hist[cx, cy] = ii[:, b, d] - ii[:, a, d] - ii[:, b, c] + ii[:, a, c]
        return hist.ravel() / (side * side)


def sed_feature(
    volume,
    x0: int,
    y0: int,
    t_start: int,
    *,
    window_t: int = 50,
    patch: int = 15,
    cells: int = 3,
    edge_threshold: float = 3.0,
    labeler: SedLabeler | None = None,
) -> FeatureVector:
    """36-value spatial edge descriptor averaged over window_t T-scans
    starting at t_start.  T-scans outside the volume contribute empty
    (all no-edge) histograms, matching zero-padded extraction."""
    samples = volume.samples if hasattr(volume, "samples") else np.asarray(volume, dtype=np.float64)
    if labeler is None:
        labeler = SedLabeler(samples, edge_threshold)
    if not (0 <= x0 < samples.shape[1] and 0 <= y0 < samples.shape[2]):
        raise DataError(f"anchor ({x0}, {y0}) outside volume {samples.shape}")
    acc = np.zeros(cells * cells * 4)
    for t in range(t_start, t_start + window_t):
        acc += labeler.cell_histogram(t, x0, y0, patch, cells)
    return FeatureVector(acc / window_t, FeatureKind.SED, (t_start, x0, y0))


def msek_depths(
    volume, x0: int, y0: int, smooth_len: int = 7, k: int = 2
) -> list[int]:
    """Likely threat time indices: strict local maxima of the smoothed,
    3x3-spatially-averaged energy series at (x0, y0), strongest first,
    truncated to k.  Monotone or flat series fall back to the global argmax."""
    if k < 1:
        raise DataError("k must be >= 1")
    samples = volume.samples if hasattr(volume, "samples") else np.asarray(volume, dtype=np.float64)
    T, X, Y = samples.shape
    if not (0 <= x0 < X and 0 <= y0 < Y):
        raise DataError(f"anchor ({x0}, {y0}) outside volume {samples.shape}")
    xs = slice(max(x0 - 1, 0), min(x0 + 2, X))
    ys = slice(max(y0 - 1, 0), min(y0 + 2, Y))
    energy = (samples[:, xs, ys] ** 2).mean(axis=(1, 2))
    energy = ndimage.uniform_filter1d(energy, size=smooth_len, mode="nearest")
    if energy.max() == 0.0:
        warnings.warn("all-zero A-scan neighborhood; depth estimate falls back to 0")
        return [0]
    interior = (energy[1:-1] > energy[:-2]) & (energy[1:-1] > energy[2:])
    peaks = np.nonzero(interior)[0] + 1
    if peaks.size == 0:
        return [int(energy.argmax())]
    order = np.lexsort((peaks, -energy[peaks]))  # energy desc, index asc on ties
    return [int(p) for p in peaks[order][:k]]
