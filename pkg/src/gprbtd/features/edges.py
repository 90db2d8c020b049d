"""Rotated 3x3 Sobel kernels and directional edge labeling.

The same four-kernel family serves the edge-histogram descriptor (on B-scans)
and the spatial edge descriptor (on T-scans).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from scipy import ndimage

from ..errors import DataError

__all__ = ["EdgeLabel", "EdgeLabelImage", "SOBEL_KERNELS", "sobel_edges", "sobel_strengths"]


class EdgeLabel(IntEnum):
    V = 0      # vertical edge (horizontal gradient)
    H = 1      # horizontal edge
    D45 = 2    # 45-degree diagonal
    D135 = 3   # 135-degree anti-diagonal
    NONE = 4


SOBEL_KERNELS = np.array(
    [
        [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]],     # V
        [[-1, -2, -1], [0, 0, 0], [1, 2, 1]],     # H
        [[0, 1, 2], [-1, 0, 1], [-2, -1, 0]],     # D45
        [[-2, -1, 0], [-1, 0, 1], [0, 1, 2]],     # D135
    ],
    dtype=np.float64,
)


@dataclass(frozen=True)
class EdgeLabelImage:
    """Per-pixel edge direction labels (EdgeLabel values, int8)."""

    labels: np.ndarray


def sobel_strengths(image: np.ndarray) -> np.ndarray:
    """Absolute responses of the four kernels, shape (4, h, w).

    Border pixels (without full 3x3 support) are zeroed.
    """
    image = np.asarray(image, dtype=np.float64)
    out = np.empty((4,) + image.shape)
    for k, kernel in enumerate(SOBEL_KERNELS):
        out[k] = np.abs(ndimage.correlate(image, kernel, mode="constant"))
    out[:, 0, :] = out[:, -1, :] = 0.0
    out[:, :, 0] = out[:, :, -1] = 0.0
    return out


def sobel_edges(image: np.ndarray, threshold: float) -> EdgeLabelImage:
    """Label each pixel by its strongest edge direction.

    A pixel is an edge pixel when the maximum kernel response strictly
    exceeds the threshold; argmax ties resolve to the lowest kernel index
    (V < H < D45 < D135).  Border pixels are NONE.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2 or image.shape[0] < 3 or image.shape[1] < 3:
        raise DataError("edge labeling needs a 2-D image at least 3x3")
    strength = sobel_strengths(image)
    labels = strength.argmax(axis=0).astype(np.int8)
    labels[strength.max(axis=0) <= threshold] = EdgeLabel.NONE
    labels[0, :] = labels[-1, :] = EdgeLabel.NONE
    labels[:, 0] = labels[:, -1] = EdgeLabel.NONE
    return EdgeLabelImage(labels)
