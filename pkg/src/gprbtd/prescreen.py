"""First-stage detectors: the F2 energy prescreener, the CCY concavity
prescreener, and their fusion into a single alarm list.

Both prescreeners expect an aligned, ground-removed volume; CCY additionally
expects depth whitening (applied by the caller).
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .config import PipelineConfig
from .errors import DataError
from .model import Alarm, GroundTruthEntry, Source, index_to_meters
from .preprocess import sliding_stats

__all__ = [
    "SpatialMap",
    "ConcavityParams",
    "RescaleParams",
    "f2_map",
    "map_alarms_cc",
    "concavity_pair",
    "ccy_map",
    "ccy_alarms",
    "rescale_alarms",
    "fit_rescale",
    "merge_alarms",
]

_CFAR_EPS = 1e-6


@dataclass(frozen=True)
class SpatialMap:
    """2-D intensity map over a lane's (cross-track, down-track) grid."""

    values: np.ndarray  # shape (X, Y)
    dx: float
    dy: float


@dataclass(frozen=True)
class ConcavityParams:
    omega: int = 3        # half-width of the per-column time search window
    gamma: float = 1.0    # amplitude threshold to retain maxima
    max_arm: int = 5      # columns traced on each side of the seed

    def __post_init__(self):
        if self.omega < 1 or self.max_arm < 1 or self.gamma <= 0:
            raise DataError("require omega >= 1, max_arm >= 1, gamma > 0")


@dataclass(frozen=True)
class RescaleParams:
    """Monotone power-law rescale a * s**b + c applied to CCY statistics."""

    a: float = 1.0
    b: float = 1.0
    c: float = 0.0

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise DataError("rescale requires a > 0 and b > 0")

    def apply(self, s: float) -> float:
        return self.a * max(s, 0.0) ** self.b + self.c


# ---------------------------------------------------------------------------
# F2
# ---------------------------------------------------------------------------

def _box_sums_2d(arr: np.ndarray, half: int) -> np.ndarray:
    """Sum of arr over the (2*half+1)^2 box around each pixel, truncated at edges."""
    out = arr
    for axis in range(2):
        c = np.cumsum(np.moveaxis(out, axis, -1), axis=-1)
        zeros = np.zeros(c.shape[:-1] + (1,))
        c = np.concatenate([zeros, c], axis=-1)
        n = c.shape[-1] - 1
        hi = np.minimum(np.arange(n) + half + 1, n)
        lo = np.maximum(np.arange(n) - half, 0)
        out = np.moveaxis(c[..., hi] - c[..., lo], -1, axis)
    return out


def cfar_2d(values: np.ndarray, half: int, guard: int, eps: float = _CFAR_EPS) -> np.ndarray:
    """Square-annulus whitening: (v - local mean) / (local std + eps)."""
    ones = np.ones_like(values)
    s1 = _box_sums_2d(values, half) - _box_sums_2d(values, guard)
    s2 = _box_sums_2d(values * values, half) - _box_sums_2d(values * values, guard)
    n = _box_sums_2d(ones, half) - _box_sums_2d(ones, guard)
    empty = n == 0
    n = np.where(empty, 1.0, n)
    mean = s1 / n
    var = np.maximum(s2 / n - mean * mean, 0.0)
    out = (values - mean) / (np.sqrt(var) + eps)
    return np.where(empty, 0.0, out)


def _bin_top2_mean(samples: np.ndarray, bin_size: int) -> np.ndarray:
    """Collapse the time axis into non-overlapping bins, each replaced by the
    mean of its top two values (single-sample bins keep their value)."""
    T = samples.shape[0]
    n_full = T // bin_size
    chunks = []
    if n_full:
        body = samples[: n_full * bin_size].reshape(n_full, bin_size, *samples.shape[1:])
        top2 = np.sort(body, axis=1)[:, -2:]
        chunks.append(top2.mean(axis=1))
    rem = samples[n_full * bin_size :]
    if rem.shape[0]:
        top2 = np.sort(rem, axis=0)[-min(2, rem.shape[0]) :]
        chunks.append(top2.mean(axis=0, keepdims=True))
    return np.concatenate(chunks, axis=0)


def f2_map(volume, cfg: PipelineConfig) -> SpatialMap:
    """Six-step energy map: down-track median filter, cross-track mean
    removal, depth binning (top-two average), 1-D CFAR along depth, depth
    sum, then 2-D CFAR and Gaussian smoothing of the spatial map."""
    T, X, Y = volume.shape
    if Y < cfg.f2_median_len:
        raise DataError(f"volume has {Y} scans, median filter needs {cfg.f2_median_len}")

    v = ndimage.median_filter(volume.samples, size=(1, 1, cfg.f2_median_len), mode="nearest")
    v = v - v.mean(axis=1, keepdims=True)
    v = _bin_top2_mean(v, cfg.f2_depth_bin)
    mean, std, _ = sliding_stats(v, cfg.f2_cfar1d_half, cfg.f2_cfar1d_guard, axis=0)
    v = (v - mean) / (std + _CFAR_EPS)
    plane = v.sum(axis=0)
    plane = cfar_2d(plane, cfg.f2_cfar2d_half, cfg.f2_cfar2d_guard)
    plane = ndimage.gaussian_filter(plane, cfg.f2_smooth_sigma)
    return SpatialMap(plane, volume.dx, volume.dy)


def map_alarms_cc(
    smap: SpatialMap, threshold: float, lane_id: str, source: Source = Source.F2
) -> list[Alarm]:
    """One alarm per 8-connected supra-threshold component, at its
    intensity-weighted centroid; statistic is the component maximum."""
    if not np.isfinite(threshold):
        raise DataError("threshold must be finite")
    mask = smap.values > threshold
    labels, n = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    alarms = []
    for comp in range(1, n + 1):
        ix, iy = np.nonzero(labels == comp)
        w = smap.values[ix, iy]
        total = w.sum()
        if total > 0:
            cx, cy = float((w * ix).sum() / total), float((w * iy).sum() / total)
        else:
            cx, cy = float(ix.mean()), float(iy.mean())
        alarms.append(
            Alarm(
                lane_id,
                index_to_meters(cx, smap.dx),
                index_to_meters(cy, smap.dy),
                float(w.max()),
                source,
            )
        )
    alarms.sort(key=lambda a: (a.y_m, a.x_m))
    return alarms


# ---------------------------------------------------------------------------
# CCY
# ---------------------------------------------------------------------------

def _trace_chain(pos: np.ndarray, t_seed: int, z0: int, p: ConcavityParams) -> list[tuple[int, int]]:
    """Trace the chain of supra-threshold points outward from the seed.

    From the seed peak at (t_seed, z0), walk one column at a time (right,
    then left, each restarting from the seed) and at each column pick the
    smallest |offset| within +/- omega whose rectified value clears gamma,
    ties resolved toward shallower times.  Returns points sorted by column.
    """
    T, Z = pos.shape
    chain = [(t_seed, z0)]
    for direction in (1, -1):
        t_cur = t_seed
        for step in range(1, p.max_arm + 1):
            z = z0 + direction * step
            if not 0 <= z < Z:
                break
            found = None
            for mag in range(0, p.omega + 1):
                for off in ((-mag, mag) if mag else (0,)):
                    t = t_cur + off
                    if 0 <= t < T and pos[t, z] >= p.gamma:
                        found = t
                        break
                if found is not None:
                    break
            if found is None:
                break
            chain.append((found, z))
            t_cur = found
    chain.sort(key=lambda tz: tz[1])
    return chain


def _chain_concavity(times: np.ndarray) -> float:
    """Average, over every consecutive subsequence of length >= 3, of
    mean(endpoint times) - midpoint time.  Positive when the traced curve is
    shallow in the middle and deep at the ends (a hyperbola apex)."""
    n = len(times)
    total = 0.0
    count = 0
    for length in range(3, n + 1):
        for start in range(0, n - length + 1):
            seg = times[start : start + length]
            if length % 2:
                mid = seg[length // 2]
            else:
                mid = 0.5 * (seg[length // 2 - 1] + seg[length // 2])
            total += 0.5 * (seg[0] + seg[-1]) - mid
            count += 1
    return total / count if count else 0.0


def _concavity_one_sign(slice_tz: np.ndarray, z0: int, p: ConcavityParams) -> float:
    pos = np.maximum(slice_tz, 0.0)
    t_seed = int(pos[:, z0].argmax())
    if pos[t_seed, z0] < p.gamma:
        return 0.0
    chain = _trace_chain(pos, t_seed, z0, p)
    if len(chain) < 3:
        return 0.0
    return _chain_concavity(np.array([t for t, _ in chain], dtype=np.float64))


def concavity_pair(slice_tz: np.ndarray, z0: int, p: ConcavityParams) -> tuple[float, float]:
    """Concavity measures (c_plus, c_minus) of a (time x space) slice at
    spatial column z0: c_plus traces the rectified positive signal, c_minus
    the rectified negated signal."""
    slice_tz = np.asarray(slice_tz, dtype=np.float64)
    if slice_tz.ndim != 2:
        raise DataError("concavity expects a 2-D (time x space) slice")
    if not 0 <= z0 < slice_tz.shape[1]:
        raise DataError(f"z0 {z0} outside [0, {slice_tz.shape[1]})")
    return (
        _concavity_one_sign(slice_tz, z0, p),
        _concavity_one_sign(-slice_tz, z0, p),
    )


def ccy_map(volume, p: ConcavityParams, smooth_sigma: float = 1.5) -> SpatialMap:
    """Per spatial location, the summed concavity (c+ + c-) of its down-track
    slice plus that of its cross-track slice, then Gaussian smoothed."""
    T, X, Y = volume.shape
    out = np.zeros((X, Y))
    for x in range(X):  # down-track slices, shared across all y at this x
        s = volume.samples[:, x, :]
        for y in range(Y):
            cp, cm = concavity_pair(s, y, p)
            out[x, y] += cp + cm
    for y in range(Y):  # cross-track slices
        s = volume.samples[:, :, y]
        for x in range(X):
            cp, cm = concavity_pair(s, x, p)
            out[x, y] += cp + cm
    if smooth_sigma > 0:
        out = ndimage.gaussian_filter(out, smooth_sigma)
    return SpatialMap(out, volume.dx, volume.dy)


def ccy_alarms(
    smap: SpatialMap, threshold: float, lane_id: str, source: Source = Source.CCY
) -> list[Alarm]:
    """Alarms at strict local maxima of 9x9 neighborhoods above threshold."""
    X, Y = smap.values.shape
    if X < 9 or Y < 9:
        raise DataError(f"map {X}x{Y} smaller than the 9x9 maxima window")
    footprint = np.ones((9, 9), dtype=bool)
    footprint[4, 4] = False
    neighbor_max = ndimage.maximum_filter(
        smap.values, footprint=footprint, mode="constant", cval=-np.inf
    )
    ix, iy = np.nonzero((smap.values > neighbor_max) & (smap.values > threshold))
    alarms = [
        Alarm(
            lane_id,
            index_to_meters(int(i), smap.dx),
            index_to_meters(int(j), smap.dy),
            float(smap.values[i, j]),
            source,
        )
        for i, j in zip(ix, iy)
    ]
    alarms.sort(key=lambda a: (a.y_m, a.x_m))
    return alarms


# ---------------------------------------------------------------------------
# Fusion
# ---------------------------------------------------------------------------

def rescale_alarms(alarms: list[Alarm], params: RescaleParams) -> list[Alarm]:
    return [
        Alarm(a.lane_id, a.x_m, a.y_m, params.apply(a.statistic), a.source) for a in alarms
    ]


_RESCALE_GRID_A = tuple(10.0 ** k for k in range(-3, 4))
_RESCALE_GRID_B = (0.25, 0.5, 1.0, 2.0)
_RESCALE_GRID_C = (0.0,)


def fit_rescale(
    train_ccy: list[Alarm],
    train_f2: list[Alarm],
    truth: list[GroundTruthEntry],
    *,
    halo_m: float = 0.25,
    proximity_m: float = 0.25,
    weights: tuple[float, float] = (0.5, 0.5),
) -> RescaleParams:
    """Grid-search the CCY power-law rescale that maximizes the training AUC
    of the merged alarm list."""
    from .evaluate import auc, label_alarms, roc

    def merged_auc(params: RescaleParams) -> float:
        merged = merge_alarms(train_f2, rescale_alarms(train_ccy, params), proximity_m, weights)
        labeled, _ = label_alarms(merged, truth, halo_m)
        hits = [la.is_hit for la in labeled]
        if not any(hits) or all(hits):
            return float("nan")
        curve = roc(labeled, n_threats=len(truth), area_m2=1.0)
        return auc(curve, 0.0, float(curve.points[-1][0]) or 1.0)

    best, best_auc = None, -np.inf
    for a, b, c in itertools.product(_RESCALE_GRID_A, _RESCALE_GRID_B, _RESCALE_GRID_C):
        params = RescaleParams(a, b, c)
        value = merged_auc(params)
        if np.isnan(value):
            warnings.warn("single-class training alarms; keeping identity rescale")
            return RescaleParams(1.0, 1.0, 0.0)
        if value > best_auc:
            best, best_auc = params, value
    return best


def merge_alarms(
    f2: list[Alarm],
    ccy_rescaled: list[Alarm],
    proximity_m: float,
    weights: tuple[float, float] = (0.5, 0.5),
) -> list[Alarm]:
    """Greedy nearest-pair merge of cross-source alarms within proximity_m.

    A merged pair becomes one alarm at the statistic-weighted centroid with
    statistic wf*sF2 + wc*sCCY; everything else passes through unchanged.
    All outputs are tagged FUSED_PRESCREEN.
    """
    if proximity_m < 0:
        raise DataError("proximity must be >= 0")
    wf, wc = weights
    if wf < 0 or wc < 0 or abs(wf + wc - 1.0) > 1e-12:
        raise DataError("merge weights must be non-negative and sum to 1")

    pairs = []
    for i, af in enumerate(f2):
        for j, ac in enumerate(ccy_rescaled):
            if af.lane_id != ac.lane_id:
                continue
            d = float(np.hypot(af.x_m - ac.x_m, af.y_m - ac.y_m))
            if d <= proximity_m:
                pairs.append((d, i, j))
    pairs.sort()

    used_f, used_c = set(), set()
    out = []
    for d, i, j in pairs:
        if i in used_f or j in used_c:
            continue
        used_f.add(i)
        used_c.add(j)
        af, ac = f2[i], ccy_rescaled[j]
        sw = af.statistic + ac.statistic
        if sw > 0:
            x = (af.statistic * af.x_m + ac.statistic * ac.x_m) / sw
            y = (af.statistic * af.y_m + ac.statistic * ac.y_m) / sw
        else:
            x, y = 0.5 * (af.x_m + ac.x_m), 0.5 * (af.y_m + ac.y_m)
        out.append(
            Alarm(af.lane_id, x, y, wf * af.statistic + wc * ac.statistic, Source.FUSED_PRESCREEN)
        )
    for i, a in enumerate(f2):
        if i not in used_f:
            out.append(Alarm(a.lane_id, a.x_m, a.y_m, a.statistic, Source.FUSED_PRESCREEN))
    for j, a in enumerate(ccy_rescaled):
        if j not in used_c:
            out.append(Alarm(a.lane_id, a.x_m, a.y_m, a.statistic, Source.FUSED_PRESCREEN))
    out.sort(key=lambda a: (a.lane_id, a.y_m, a.x_m))
    return out
