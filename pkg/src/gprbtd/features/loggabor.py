"""Log-Gabor curvelet bank and the 144-value multi-plane energy feature.

The bank holds 36 filters (9 orientations at 20-degree spacing x 4 dyadic
center frequencies) defined directly in the frequency domain: a Gaussian in
log radial frequency times a Gaussian in orientation.  Feature extraction
filters four planes through the cube center (down-track, cross-track, both
diagonals), each split into overlapping left/middle/right column regions
with a fixed orientation-group assignment, and records filter energies in
15 half-overlapping depth bins.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import DataError
from .base import FeatureKind, FeatureVector

__all__ = [
    "LogGaborBank",
    "log_gabor_response",
    "build_log_gabor_bank",
    "lg_feature_matrix",
    "lg_feature",
    "LG_REGION_ORIENTATIONS",
]

N_SCALES = 4
N_ORIENTATIONS = 9
N_FILTERS = N_SCALES * N_ORIENTATIONS

# Orientation-group ownership of the three column regions of a plane
# (orientation index k has center angle k * 20 degrees).
LG_REGION_ORIENTATIONS = {
    "left": (0, 1, 2),
    "middle": (3, 4, 8),
    "right": (5, 6, 7),
}


def log_gabor_response(rho, theta, rho0: float, theta0: float,
                       sigma_rho: float, sigma_theta: float):
    """Frequency response at polar coordinates (rho, theta).

    sigma_rho is the radial spread as a ratio (response falls to e^-1/2 at
    rho = rho0 * sigma_rho); sigma_theta is the angular spread in radians.
    Zero at rho = 0, where log radius is undefined.
    """
    rho = np.asarray(rho, dtype=np.float64)
    dtheta = np.arctan2(np.sin(theta - theta0), np.cos(theta - theta0))
    radial = np.zeros_like(rho)
    nz = rho > 0
    radial[nz] = np.exp(
        -0.5 * (np.log(rho[nz] / rho0) / np.log(sigma_rho)) ** 2
    )
    return radial * np.exp(-0.5 * (dtheta / sigma_theta) ** 2)


@dataclass(frozen=True)
class LogGaborBank:
    """36 frequency-domain filters in FFT layout (DC at index [0, 0])."""

    filters: np.ndarray          # (36, h, w), index = orientation * 4 + scale
    rho0: np.ndarray             # (4,)
    theta0: np.ndarray           # (9,)
    sigma_rho: float
    sigma_theta: float


@lru_cache(maxsize=64)
def _bank_cached(h: int, w: int, rho_max: float, sigma_rho: float,
                 sigma_theta: float) -> LogGaborBank:
    rho0 = rho_max / 2.0 ** np.arange(N_SCALES - 1, -1, -1)
    theta0 = np.deg2rad(20.0) * np.arange(N_ORIENTATIONS)
    ft = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    rho = np.hypot(ft, fx)
    theta = np.arctan2(ft, fx)
    filters = np.empty((N_FILTERS, h, w))
    for o in range(N_ORIENTATIONS):
        for s in range(N_SCALES):
            filters[o * N_SCALES + s] = log_gabor_response(
                rho, theta, rho0[s], theta0[o], sigma_rho, sigma_theta
            )
    filters.setflags(write=False)
    return LogGaborBank(filters, rho0, theta0, sigma_rho, sigma_theta)


def build_log_gabor_bank(h: int, w: int, cfg=None) -> LogGaborBank:
    """Bank for an h x w spectrum; cfg supplies spreads and the top frequency."""
    if h < 8 or w < 8:
        raise DataError(f"bank needs a spectrum of at least 8x8, got {h}x{w}")
    rho_max = cfg.lg_rho_max if cfg is not None else 0.35
    sigma_rho = cfg.lg_sigma_rho if cfg is not None else 0.65
    sigma_theta_deg = cfg.lg_sigma_theta_deg if cfg is not None else 12.0
    return _bank_cached(int(h), int(w), float(rho_max), float(sigma_rho),
                        float(np.deg2rad(sigma_theta_deg)))


def _region_slices(n_cols: int) -> dict[str, slice]:
    w = max(2, n_cols // 2)
    return {
        "left": slice(0, w),
        "middle": slice((n_cols - w) // 2, (n_cols - w) // 2 + w),
        "right": slice(n_cols - w, n_cols),
    }


def _depth_bins(n_rows: int, n_bins: int) -> list[tuple[int, int]]:
    length = max(2, int(round(n_rows / 8)))
    length = min(length, n_rows)
    starts = np.round(np.linspace(0, n_rows - length, n_bins)).astype(int)
    return [(int(s), int(s + length)) for s in starts]


def _cube_planes(samples: np.ndarray) -> list[np.ndarray]:
    T, X, Y = samples.shape
    cx, cy = (X - 1) // 2, (Y - 1) // 2
    n = min(X, Y)
    k = np.arange(n)
    return [
        samples[:, cx, :],              # down-track B-scan
        samples[:, :, cy],              # cross-track B-scan
        samples[:, k, k],               # positive diagonal
        samples[:, k, Y - 1 - k],       # anti-diagonal
    ]


def lg_feature_matrix(cube, cfg=None) -> np.ndarray:
    """(15, 144) filter-energy matrix: 4 planes x 36 filters per depth bin."""
    samples = cube.samples if hasattr(cube, "samples") else np.asarray(cube, dtype=np.float64)
    if samples.ndim != 3:
        raise DataError("LG feature needs a 3-D cube")
    n_bins = cfg.lg_depth_bins if cfg is not None else 15
    planes = _cube_planes(samples)
    if min(p.shape[1] for p in planes) < 4 or samples.shape[0] < 2:
        raise DataError(f"cube {samples.shape} too small for the four LG planes")

    matrix = np.zeros((n_bins, 4 * N_FILTERS))
    for p_idx, plane in enumerate(planes):
        bins = _depth_bins(plane.shape[0], n_bins)
        regions = _region_slices(plane.shape[1])
        for name, cols in regions.items():
            region = plane[:, cols]
            bank = build_log_gabor_bank(*region.shape, cfg)
            spectrum = np.fft.fft2(region)
            for o in LG_REGION_ORIENTATIONS[name]:
                for s in range(N_SCALES):
                    f = o * N_SCALES + s
                    response = np.fft.ifft2(spectrum * bank.filters[f])
                    energy = np.abs(response) ** 2
                    col = p_idx * N_FILTERS + f
                    for b, (lo, hi) in enumerate(bins):
                        matrix[b, col] = energy[lo:hi].sum()
    return matrix


def lg_feature(matrix: np.ndarray, anchor: tuple[int, int, int] = (0, 0, 0)) -> FeatureVector:
    """Column-wise maximum over depth bins: the 144-value LG descriptor."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != 4 * N_FILTERS:
        raise DataError(f"expected a (bins, 144) matrix, got {matrix.shape}")
    if not np.isfinite(matrix).all():
        raise DataError("LG matrix contains non-finite values")
    return FeatureVector(matrix.max(axis=0), FeatureKind.LG, anchor)
