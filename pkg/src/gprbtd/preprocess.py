"""Ground alignment, ground removal, depth whitening, temporal downsampling.

All functions are pure: they return new volumes and never mutate inputs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .model import GprVolume

__all__ = [
    "GroundIndexMap",
    "estimate_ground",
    "align_ground",
    "remove_ground",
    "depth_whiten",
    "downsample_time",
    "sliding_stats",
]


@dataclass(frozen=True)
class GroundIndexMap:
    """Per-(x, y) time index of the estimated ground response."""

    index: np.ndarray  # int array, shape (X, Y)


def estimate_ground(volume: GprVolume, search_depth: int) -> GroundIndexMap:
    """Locate the ground response as the early-time absolute-amplitude peak.

    Searches the first search_depth samples of every A-scan.  All-zero
    A-scans get index 0 and trigger a warning.
    """
    T = volume.shape[0]
    if not 1 <= search_depth <= T:
        raise DataError(f"search_depth must lie in [1, {T}], got {search_depth}")
    head = np.abs(volume.samples[:search_depth])
    idx = head.argmax(axis=0).astype(np.intp)
    dead = head.max(axis=0) == 0.0
    if dead.any():
        warnings.warn(f"{int(dead.sum())} all-zero A-scan(s); ground index set to 0")
        idx[dead] = 0
    return GroundIndexMap(idx)


def align_ground(volume: GprVolume, gmap: GroundIndexMap, target_index: int) -> GprVolume:
    """Shift each A-scan (zero-fill, no wrap) so its ground lands on target_index."""
    T, X, Y = volume.shape
    if not 0 <= target_index < T:
        raise DataError(f"target_index {target_index} outside [0, {T})")
    if gmap.index.shape != (X, Y):
        raise DataError("ground index map does not match volume spatial dims")
    out = np.zeros_like(volume.samples)
    shifts = target_index - gmap.index
    # Group columns by shift so each distinct shift is one vectorized copy.
    for s in np.unique(shifts):
        cols = shifts == s
        if s >= 0:
            out[s:T, :, :][:, cols] = volume.samples[: T - s, :, :][:, cols]
        else:
            out[: T + s, :, :][:, cols] = volume.samples[-s:, :, :][:, cols]
    return volume.with_samples(out, ground_index=target_index)


def remove_ground(volume: GprVolume) -> GprVolume:
    """Drop all samples at or above the (aligned) ground response."""
    if volume.ground_index is None:
        raise DataError("remove_ground requires an aligned volume (ground_index set)")
    g = volume.ground_index
    if g >= volume.shape[0] - 1:
        raise DataError("ground_index at the last sample leaves an empty volume")
    return volume.with_samples(volume.samples[g + 1 :].copy(), ground_index=None)


def sliding_stats(values: np.ndarray, half_window: int, guard: int, axis: int):
    """Leave-guard-out sliding mean and std along one axis.

    For each position, statistics cover neighbors j with
    guard < |j - i| <= half_window, truncated at the array ends.  Positions
    whose annulus is empty get mean = value (so value - mean = 0) and std 0.
    Returns (mean, std, count).
    """
    v = np.moveaxis(np.asarray(values, dtype=np.float64), axis, -1)
    n = v.shape[-1]

    def window_sums(arr, half):
        # sum over [i-half, i+half] intersected with [0, n) via cumsum
        c = np.cumsum(arr, axis=-1)
        zeros = np.zeros(arr.shape[:-1] + (1,), dtype=arr.dtype)
        c = np.concatenate([zeros, c], axis=-1)  # c[..., k] = sum of first k
        hi = np.minimum(np.arange(n) + half + 1, n)
        lo = np.maximum(np.arange(n) - half, 0)
        return c[..., hi] - c[..., lo]

    ones = np.ones_like(v)
    s1_full, s1_guard = window_sums(v, half_window), window_sums(v, guard)
    s2_full, s2_guard = window_sums(v * v, half_window), window_sums(v * v, guard)
    n_full, n_guard = window_sums(ones, half_window), window_sums(ones, guard)

    count = n_full - n_guard
    empty = count == 0
    safe = np.where(empty, 1.0, count)
    mean = (s1_full - s1_guard) / safe
    var = (s2_full - s2_guard) / safe - mean * mean
    std = np.sqrt(np.maximum(var, 0.0))
    mean = np.where(empty, v, mean)
    std = np.where(empty, 0.0, std)
    back = lambda a: np.moveaxis(a, -1, axis)
    return back(mean), back(std), back(count)


def depth_whiten(
    volume: GprVolume, half_window: int = 15, guard: int = 2, eps: float = 1e-6
) -> GprVolume:
    """Whiten each sample against its down-track neighbors at the same depth.

    Output is (s - mean) / (std + eps) with the statistics taken over
    down-track neighbors at the same (t, x), excluding a guard band around
    the sample itself.
    """
    if not half_window > guard >= 0:
        raise DataError("require half_window > guard >= 0")
    mean, std, _ = sliding_stats(volume.samples, half_window, guard, axis=2)
    out = (volume.samples - mean) / (std + eps)
    return volume.with_samples(out, ground_index=volume.ground_index)


def downsample_time(volume: GprVolume, factor: int) -> GprVolume:
    """Keep every factor-th time sample starting at 0; dt scales by factor."""
    if factor < 1:
        raise DataError(f"downsample factor must be >= 1, got {factor}")
    g = volume.ground_index
    return GprVolume(
        volume.samples[::factor].copy(),
        volume.dt * factor,
        volume.dx,
        volume.dy,
        None if g is None else g // factor,
    )
