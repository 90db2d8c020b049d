"""Edge histogram descriptor on GPR data cubes.

The descriptor labels edges in the seven middle planes of a (60, 15, 15)
cube, splits each plane into seven overlapping row bands, histograms the
edge labels per band (five bins: four directions plus non-edge), averages
across planes, and concatenates the seven band histograms.
"""

from __future__ import annotations

import numpy as np

from ..errors import DataError
from .base import FeatureKind, FeatureVector
from .edges import EdgeLabel, sobel_edges

__all__ = ["ehd_feature", "ehd_features_at_depths", "EHD_EXTENT"]

EHD_EXTENT = (60, 15, 15)
_N_BANDS = 7
_BAND_ROWS = 12
_BAND_STRIDE = 8
_MIDDLE = range(4, 11)  # the 7 middle of 15 channels


def _band_starts() -> list[int]:
    return [i * _BAND_STRIDE for i in range(_N_BANDS)]


def _plane_histograms(labels: np.ndarray, n_cols: int) -> np.ndarray:
    """(7, 5) label histograms of the row bands, normalized per band."""
    out = np.empty((_N_BANDS, 5))
    for i, s in enumerate(_band_starts()):
        band = labels[s : s + _BAND_ROWS]
        out[i] = np.bincount(band.ravel(), minlength=5) / (_BAND_ROWS * n_cols)
    return out


def ehd_feature(cube, direction: FeatureKind, edge_threshold: float,
                anchor: tuple[int, int, int] = (0, 0, 0)) -> FeatureVector:
    """35-value edge histogram of a (60, 15, 15) cube.

    direction EHD_DT fixes cross-track planes (time x down-track images);
    EHD_CT fixes down-track planes.
    """
    samples = cube.samples if hasattr(cube, "samples") else np.asarray(cube, dtype=np.float64)
    if samples.shape != EHD_EXTENT:
        raise DataError(f"EHD expects a cube of extent {EHD_EXTENT}, got {samples.shape}")
    if direction not in (FeatureKind.EHD_DT, FeatureKind.EHD_CT):
        raise DataError(f"direction must be EHD_DT or EHD_CT, got {direction}")

    acc = np.zeros((_N_BANDS, 5))
    for c in _MIDDLE:
        plane = samples[:, c, :] if direction is FeatureKind.EHD_DT else samples[:, :, c]
        labels = sobel_edges(plane, edge_threshold).labels
        acc += _plane_histograms(labels, plane.shape[1])
    acc /= len(_MIDDLE)
    return FeatureVector(acc.ravel(), direction, anchor)


def ehd_features_at_depths(
    tall: np.ndarray, t_starts, edge_threshold: float
) -> dict[FeatureKind, list[FeatureVector]]:
    """EHD features of the (60, 15, 15) windows starting at each t_start.

    tall is a (T, 15, 15) array; windows reaching past T are zero-padded.
    Labels the full-height planes once and reproduces the per-window border
    rule (window boundary rows count as non-edge), so each output equals
    ehd_feature on the corresponding extracted window.
    """
    tall = np.asarray(tall, dtype=np.float64)
    if tall.ndim != 3 or tall.shape[1:] != (15, 15):
        raise DataError(f"expected a (T, 15, 15) stack, got {tall.shape}")
    t_starts = [int(t) for t in t_starts]
    win = EHD_EXTENT[0]
    need = max(t_starts) + win
    if need > tall.shape[0]:
        tall = np.concatenate(
            [tall, np.zeros((need - tall.shape[0],) + tall.shape[1:])], axis=0
        )
    T = tall.shape[0]

    out: dict[FeatureKind, list[FeatureVector]] = {
        FeatureKind.EHD_DT: [],
        FeatureKind.EHD_CT: [],
    }
    for direction in (FeatureKind.EHD_DT, FeatureKind.EHD_CT):
        # Per middle plane: per-row label counts and their prefix sums.
        row_counts = []  # (T, 5) per plane
        prefix = []      # (T + 1, 5) per plane
        for c in _MIDDLE:
            plane = tall[:, c, :] if direction is FeatureKind.EHD_DT else tall[:, :, c]
            labels = sobel_edges(plane, edge_threshold).labels
            rc = np.stack([np.bincount(row, minlength=5) for row in labels])
            row_counts.append(rc)
            prefix.append(np.vstack([np.zeros((1, 5)), np.cumsum(rc, axis=0)]))

        n_cols = 15
        for t0 in t_starts:
            acc = np.zeros((_N_BANDS, 5))
            border = (t0, t0 + win - 1)  # window rows relabeled NONE
            for rc, pf in zip(row_counts, prefix):
                for i, s in enumerate(_band_starts()):
                    a, b = t0 + s, t0 + s + _BAND_ROWS
                    counts = pf[b] - pf[a]
                    for r in border:
                        if a <= r < b:
                            counts = counts - rc[r]
                            counts[EdgeLabel.NONE] += n_cols
                    acc[i] += counts / (_BAND_ROWS * n_cols)
            acc /= len(_MIDDLE)
            out[direction].append(FeatureVector(acc.ravel(), direction, (t0, 0, 0)))
    return out
