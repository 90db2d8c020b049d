"""The four discriminator pipelines: training-set construction, training,
per-alarm inference aggregation, and the Platt-product fusion.

Each discriminator consumes the standard prescreener-alarm cube (full
below-ground time axis, 18x18 spatial) or, for the spatial edge descriptor,
the prepared lane volume itself, and reduces a stack of per-depth classifier
statistics to one decision statistic per alarm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import PipelineConfig
from .errors import DataError, NotTrainedError
from .evaluate import LabeledAlarm
from .features import (
    FeatureKind,
    FeatureVector,
    SedLabeler,
    ehd_features_at_depths,
    gprhog_feature,
    lg_feature,
    lg_feature_matrix,
    msek_depths,
    sed_feature,
)
from .learn.forest import forest_decision, forest_train
from .learn.kde import PrototypeSet, kde_score, summarize_prototypes
from .learn.platt import PlattParams, platt_apply, platt_fit
from .learn.svm import svm_decision, svm_train
from .model import Alarm, DataCube, DepthCategory, GprVolume, LaneDataset, extract_cube, meters_to_index
from .preprocess import align_ground, depth_whiten, downsample_time, estimate_ground, remove_ground

__all__ = [
    "KINDS",
    "PreparedLane",
    "prepare_lane",
    "standard_cube",
    "LabeledFeature",
    "TrainSet",
    "Discriminator",
    "build_ehd_prototypes",
    "build_train_ehd",
    "build_train_lg",
    "build_train_gprhog",
    "build_train_sed",
    "train_discriminator",
    "infer_ehd",
    "infer_lg",
    "infer_gprhog",
    "infer_sed",
    "infer_lane",
    "fit_fusion_platt",
    "fuse_discriminators",
    "apply_fusion",
]

KINDS = ("ehd", "lg", "gprhog", "sed")


@dataclass
class PreparedLane:
    """Aligned, ground-removed, depth-whitened lane plus its downsampled twin."""

    lane_id: str
    volume: GprVolume        # full-rate, below ground, whitened
    volume_ds: GprVolume     # temporally downsampled, for gprHOG
    truth: list
    area_m2: float


def prepare_lane(lane: LaneDataset, cfg: PipelineConfig) -> PreparedLane:
    raw = lane.volume
    if raw.ground_index is None:
        search = max(1, int(raw.shape[0] * cfg.ground_search_frac))
        gmap = estimate_ground(raw, search)
        raw = align_ground(raw, gmap, cfg.ground_target_index)
    below = remove_ground(raw)
    whitened = depth_whiten(below, cfg.whiten_half_window, cfg.whiten_guard, cfg.whiten_eps)
    return PreparedLane(
        lane.lane_id,
        whitened,
        downsample_time(whitened, cfg.hog_time_downsample),
        lane.truth,
        lane.area_m2,
    )


def standard_cube(volume: GprVolume, alarm: Alarm, cfg: PipelineConfig) -> DataCube:
    """Full-depth (T, 18, 18) cube at the alarm; discriminators crop it."""
    return extract_cube(volume, alarm, (volume.shape[0], cfg.cube_x, cfg.cube_y), 0)


@dataclass(frozen=True)
class LabeledFeature:
    vector: FeatureVector
    label: int


@dataclass
class TrainSet:
    features: list[LabeledFeature] = field(default_factory=list)
    provenance: list[tuple] = field(default_factory=list)  # (lane_id, x_m, y_m, t)

    def add(self, vector: FeatureVector, label: int, lane_id: str, alarm: Alarm):
        self.features.append(LabeledFeature(vector, int(label)))
        self.provenance.append((lane_id, alarm.x_m, alarm.y_m, vector.anchor[0]))

    def matrix(self, kind: FeatureKind | None = None):
        rows = [lf for lf in self.features if kind is None or lf.vector.kind is kind]
        if not rows:
            raise DataError(f"train set holds no rows of kind {kind}")
        X = np.stack([lf.vector.values for lf in rows])
        y = np.array([lf.label for lf in rows], dtype=np.float64)
        return X, y


@dataclass
class Discriminator:
    kind: str
    models: dict = field(default_factory=dict)
    provenance_lanes: set = field(default_factory=set)
    provenance_rows: list = field(default_factory=list)

    def _require(self, *names):
        for name in names:
            if name not in self.models:
                raise NotTrainedError(f"{self.kind} discriminator missing model {name!r}")


def _resolve_gamma(configured: float, dim: int) -> float:
    return configured if configured > 0 else 1.0 / dim


def _shift_positive(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Affine map onto roughly [1, 2] so geometric means stay defined."""
    if hi <= lo:
        return np.ones_like(values)
    return np.maximum((values - lo) / (hi - lo) + 1.0, 0.0)


def _top_sum(values: np.ndarray, k: int) -> float:
    v = np.sort(np.asarray(values, dtype=np.float64))
    return float(v[-min(k, v.size):].sum())


# ---------------------------------------------------------------------------
# EHD
# ---------------------------------------------------------------------------

def _ehd_tall(prepared: PreparedLane, alarm: Alarm, cfg: PipelineConfig) -> np.ndarray:
    cube = standard_cube(prepared.volume, alarm, cfg)
    lo = (cfg.cube_x - 15) // 2
    return cube.samples[:, lo : lo + 15, lo : lo + 15]


def _ehd_depth_features(prepared, alarm, cfg):
    t_starts = [k * cfg.ehd_depth_stride for k in range(cfg.ehd_depth_count)]
    return ehd_features_at_depths(_ehd_tall(prepared, alarm, cfg), t_starts, cfg.ehd_edge_threshold)


def build_ehd_prototypes(
    train_labeled: list[LabeledAlarm],
    prepared: dict[str, PreparedLane],
    cfg: PipelineConfig,
    seed: int,
) -> PrototypeSet:
    """Summarize the non-target alarms' per-depth features (both directions
    concatenated) into k prototypes."""
    rows = []
    for la in train_labeled:
        if la.is_hit:
            continue
        feats = _ehd_depth_features(prepared[la.alarm.lane_id], la.alarm, cfg)
        for dt, ct in zip(feats[FeatureKind.EHD_DT], feats[FeatureKind.EHD_CT]):
            rows.append(np.concatenate([dt.values, ct.values]))
    if not rows:
        raise DataError("no non-target alarms to summarize")
    k = min(cfg.ehd_prototypes, len(rows))
    return summarize_prototypes(np.stack(rows), k, seed)


def build_train_ehd(
    train_labeled: list[LabeledAlarm],
    prepared: dict[str, PreparedLane],
    protos: PrototypeSet,
    cfg: PipelineConfig,
    seed: int,
) -> TrainSet:
    """Negatives: a random 5 of the 14 per-depth features per alarm.
    Positives: the per-depth features whose density against the non-target
    prototypes lands in the lowest quantile of all positive candidates."""
    rng = np.random.default_rng(seed)
    ts = TrainSet()
    positive_candidates = []  # (score, labeled alarm, depth index, feats)
    for la in train_labeled:
        feats = _ehd_depth_features(prepared[la.alarm.lane_id], la.alarm, cfg)
        pairs = list(zip(feats[FeatureKind.EHD_DT], feats[FeatureKind.EHD_CT]))
        if la.is_hit:
            for depth, (dt, ct) in enumerate(pairs):
                score = kde_score(np.concatenate([dt.values, ct.values]), protos)
                positive_candidates.append((score, la, depth, dt, ct))
        else:
            chosen = rng.choice(len(pairs), size=min(cfg.ehd_neg_per_alarm, len(pairs)),
                                replace=False)
            for depth in sorted(int(c) for c in chosen):
                dt, ct = pairs[depth]
                ts.add(dt, 0, la.alarm.lane_id, la.alarm)
                ts.add(ct, 0, la.alarm.lane_id, la.alarm)

    if positive_candidates:
        scores = np.array([c[0] for c in positive_candidates])
        k_sel = max(1, int(np.floor(cfg.ehd_kde_quantile * scores.size + 1e-9)))
        selected = np.argsort(scores, kind="stable")[:k_sel]
        for idx in sorted(selected):
            _, la, depth, dt, ct = positive_candidates[idx]
            ts.add(dt, 1, la.alarm.lane_id, la.alarm)
            ts.add(ct, 1, la.alarm.lane_id, la.alarm)
    return ts


def _train_ehd(train_labeled, prepared, cfg, seed) -> Discriminator:
    protos = build_ehd_prototypes(train_labeled, prepared, cfg, seed)
    ts = build_train_ehd(train_labeled, prepared, protos, cfg, seed + 1)
    disc = Discriminator("ehd")
    gamma = _resolve_gamma(cfg.ehd_svm_gamma, 35)
    for name, kind in (("dt", FeatureKind.EHD_DT), ("ct", FeatureKind.EHD_CT)):
        X, y = ts.matrix(kind)
        model = svm_train(X, y, gamma, cfg.ehd_svm_c)
        train_dec = svm_decision(model, X)
        disc.models[f"svm_{name}"] = model
        disc.models[f"shift_{name}"] = (float(train_dec.min()), float(train_dec.max()))
    disc.models["prototypes"] = protos
    disc.provenance_lanes = {p[0] for p in ts.provenance}
    disc.provenance_rows = ts.provenance
    return disc


def infer_ehd(disc: Discriminator, cube: DataCube, cfg: PipelineConfig) -> float:
    """Per-depth geometric mean of the two directional SVM statistics
    (shifted positive first), then the sum of the top 3."""
    disc._require("svm_dt", "svm_ct", "shift_dt", "shift_ct")
    samples = cube.samples if isinstance(cube, DataCube) else np.asarray(cube)
    if samples.shape[1] == cfg.cube_x:
        lo = (cfg.cube_x - 15) // 2
        samples = samples[:, lo : lo + 15, lo : lo + 15]
    t_starts = [k * cfg.ehd_depth_stride for k in range(cfg.ehd_depth_count)]
    feats = ehd_features_at_depths(samples, t_starts, cfg.ehd_edge_threshold)
    fused = []
    per_dir = {}
    for name, kind in (("dt", FeatureKind.EHD_DT), ("ct", FeatureKind.EHD_CT)):
        X = np.stack([fv.values for fv in feats[kind]])
        dec = svm_decision(disc.models[f"svm_{name}"], X)
        per_dir[name] = _shift_positive(dec, *disc.models[f"shift_{name}"])
    fused = np.sqrt(per_dir["dt"] * per_dir["ct"])
    return _top_sum(fused, 3)


# ---------------------------------------------------------------------------
# LG
# ---------------------------------------------------------------------------

def build_train_lg(
    train_labeled: list[LabeledAlarm],
    prepared: dict[str, PreparedLane],
    cfg: PipelineConfig,
    seed: int,
) -> tuple[TrainSet, TrainSet]:
    """Set 1: per-alarm column-max vectors.  Set 2: the top rows of each
    depth-bin matrix by row norm, as independent vectors.  Deeply buried
    threats are replicated once in both sets; each set is then randomly
    subsampled to the configured fraction."""
    rng = np.random.default_rng(seed)
    set_max, set_rows = TrainSet(), TrainSet()
    for la in train_labeled:
        p = prepared[la.alarm.lane_id]
        matrix = lg_feature_matrix(standard_cube(p.volume, la.alarm, cfg), cfg)
        label = int(la.is_hit)
        deep = la.threat is not None and la.threat.depth_category is DepthCategory.DEEP
        copies = 2 if deep else 1
        colmax = lg_feature(matrix)
        top = np.argsort(-np.linalg.norm(matrix, axis=1), kind="stable")[: cfg.lg_top_rows]
        for _ in range(copies):
            set_max.add(colmax, label, la.alarm.lane_id, la.alarm)
            for r in sorted(int(t) for t in top):
                set_rows.add(FeatureVector(matrix[r], FeatureKind.LG, (r, 0, 0)),
                             label, la.alarm.lane_id, la.alarm)

    for ts in (set_max, set_rows):
        n = len(ts.features)
        keep = int(round(cfg.lg_subsample_frac * n))
        if keep < 1:
            raise DataError(
                f"subsampling {cfg.lg_subsample_frac:.0%} of {n} rows leaves nothing; "
                "generate a larger training set"
            )
        chosen = set(int(i) for i in rng.choice(n, size=keep, replace=False))
        labels_kept = {ts.features[i].label for i in chosen}
        if len(labels_kept) == 1:
            want = 1 - next(iter(labels_kept))
            for i, lf in enumerate(ts.features):
                if lf.label == want:
                    chosen.add(i)
                    break
        order = sorted(chosen)
        ts.features = [ts.features[i] for i in order]
        ts.provenance = [ts.provenance[i] for i in order]
    return set_max, set_rows


def _train_lg(train_labeled, prepared, cfg, seed) -> Discriminator:
    set_max, set_rows = build_train_lg(train_labeled, prepared, cfg, seed)
    disc = Discriminator("lg")
    gamma = _resolve_gamma(cfg.lg_svm_gamma, 144)
    for name, ts in (("max", set_max), ("rows", set_rows)):
        X, y = ts.matrix()
        disc.models[f"svm_{name}"] = svm_train(X, y, gamma, cfg.lg_svm_c)
    disc.provenance_lanes = {p[0] for p in set_max.provenance} | {
        p[0] for p in set_rows.provenance
    }
    disc.provenance_rows = set_max.provenance + set_rows.provenance
    return disc


def infer_lg(disc: Discriminator, cube: DataCube, cfg: PipelineConfig) -> float:
    """First SVM on the column-max vector; second SVM on every depth-bin row,
    summing its top 3 statistics; the two confidences add."""
    disc._require("svm_max", "svm_rows")
    matrix = lg_feature_matrix(cube, cfg)
    c1 = svm_decision(disc.models["svm_max"], matrix.max(axis=0))
    row_stats = svm_decision(disc.models["svm_rows"], matrix)
    return float(c1) + _top_sum(row_stats, cfg.lg_top_confidences)


# ---------------------------------------------------------------------------
# gprHOG
# ---------------------------------------------------------------------------

def _hog_pair(volume_ds: GprVolume, alarm: Alarm, t_start: int, cfg: PipelineConfig):
    cube = extract_cube(volume_ds, alarm, (cfg.hog_cube_t, 18, 18), t_start)
    return gprhog_feature(cube, cfg.hog_cell, cfg.hog_bins)


def build_train_gprhog(
    train_labeled: list[LabeledAlarm],
    prepared: dict[str, PreparedLane],
    cfg: PipelineConfig,
    seed: int,
) -> TrainSet:
    """Threat alarms contribute patches at their top energy-peak depths;
    non-threat alarms contribute patches at regular depth intervals."""
    ts = TrainSet()
    half = cfg.hog_cube_t // 2
    for la in train_labeled:
        p = prepared[la.alarm.lane_id]
        vol = p.volume_ds
        T = vol.shape[0]
        ix = meters_to_index(la.alarm.x_m, vol.dx, vol.shape[1])
        iy = meters_to_index(la.alarm.y_m, vol.dy, vol.shape[2])
        if la.is_hit:
            depths = msek_depths(vol, ix, iy, cfg.msek_smooth_len, k=cfg.hog_pos_patches)
            starts = [d - half for d in depths]
        else:
            n_avail = max(1, T - cfg.hog_cube_t + 1)
            starts = [int(np.floor(k * n_avail / cfg.hog_neg_patches))
                      for k in range(cfg.hog_neg_patches)]
        for t0 in starts:
            h_tx, h_ty = _hog_pair(vol, la.alarm, t0, cfg)
            label = int(la.is_hit)
            for fv in (h_tx, h_ty):
                fv = FeatureVector(fv.values, fv.kind, (t0, ix, iy))
                ts.add(fv, label, la.alarm.lane_id, la.alarm)
    return ts


def _train_gprhog(train_labeled, prepared, cfg, seed) -> Discriminator:
    ts = build_train_gprhog(train_labeled, prepared, cfg, seed)
    disc = Discriminator("gprhog")
    seeds = np.random.SeedSequence(seed).spawn(2)
    for name, kind, ss in (("tx", FeatureKind.HOG_TX, seeds[0]),
                           ("ty", FeatureKind.HOG_TY, seeds[1])):
        X, y = ts.matrix(kind)
        disc.models[f"forest_{name}"] = forest_train(
            X, y, cfg.hog_trees, int(ss.generate_state(1)[0])
        )
    disc.provenance_lanes = {p[0] for p in ts.provenance}
    disc.provenance_rows = ts.provenance
    return disc


def infer_gprhog(disc: Discriminator, cube: DataCube, cfg: PipelineConfig) -> float:
    """Forest statistics at regular depth intervals; per track the top-12
    sum; the two track sums multiply."""
    disc._require("forest_tx", "forest_ty")
    samples = cube.samples if isinstance(cube, DataCube) else np.asarray(cube)
    T = samples.shape[0]
    starts = list(range(0, max(T - cfg.hog_cube_t, 0) + 1, cfg.hog_infer_stride))
    tx_rows, ty_rows = [], []
    for t0 in starts:
        window = samples[t0 : t0 + cfg.hog_cube_t]
        if window.shape[0] < cfg.hog_cube_t:
            window = np.concatenate(
                [window, np.zeros((cfg.hog_cube_t - window.shape[0],) + window.shape[1:])]
            )
        h_tx, h_ty = gprhog_feature(window, cfg.hog_cell, cfg.hog_bins)
        tx_rows.append(h_tx.values)
        ty_rows.append(h_ty.values)
    s_tx = forest_decision(disc.models["forest_tx"], np.stack(tx_rows))
    s_ty = forest_decision(disc.models["forest_ty"], np.stack(ty_rows))
    return _top_sum(s_tx, cfg.hog_top_stats) * _top_sum(s_ty, cfg.hog_top_stats)


# ---------------------------------------------------------------------------
# SED
# ---------------------------------------------------------------------------

def build_train_sed(
    train_labeled: list[LabeledAlarm],
    prepared: dict[str, PreparedLane],
    cfg: PipelineConfig,
    seed: int,
) -> TrainSet:
    """Two descriptors per alarm, anchored at its two strongest energy
    peaks (one when only a single peak exists)."""
    ts = TrainSet()
    labelers: dict[str, SedLabeler] = {}
    for la in train_labeled:
        p = prepared[la.alarm.lane_id]
        vol = p.volume
        labeler = labelers.setdefault(
            p.lane_id, SedLabeler(vol.samples, cfg.sed_edge_threshold)
        )
        ix = meters_to_index(la.alarm.x_m, vol.dx, vol.shape[1])
        iy = meters_to_index(la.alarm.y_m, vol.dy, vol.shape[2])
        depths = msek_depths(vol, ix, iy, cfg.msek_smooth_len, k=cfg.sed_train_maxima)
        for d in depths:
            fv = sed_feature(
                vol, ix, iy, d - cfg.sed_lead,
                window_t=cfg.sed_window_t, patch=cfg.sed_patch, cells=cfg.sed_cells,
                edge_threshold=cfg.sed_edge_threshold, labeler=labeler,
            )
            ts.add(fv, int(la.is_hit), la.alarm.lane_id, la.alarm)
    return ts


def _train_sed(train_labeled, prepared, cfg, seed) -> Discriminator:
    ts = build_train_sed(train_labeled, prepared, cfg, seed)
    disc = Discriminator("sed")
    X, y = ts.matrix()
    disc.models["svm"] = svm_train(X, y, cfg.sed_svm_gamma, cfg.sed_svm_c)
    disc.provenance_lanes = {p[0] for p in ts.provenance}
    disc.provenance_rows = ts.provenance
    return disc


def _sed_feature_stack(labeler: SedLabeler, ix: int, iy: int, cfg: PipelineConfig) -> np.ndarray:
    """(depths x offsets, 36) descriptor stack for one alarm location."""
    g = cfg.sed_offset_grid
    offs = [(ox, oy) for ox in range(-(g // 2), g // 2 + 1)
            for oy in range(-(g // 2), g // 2 + 1)]
    anchors = [k * cfg.sed_depth_stride for k in range(cfg.sed_depth_count)]
    t_lo = anchors[0] - cfg.sed_lead
    t_hi = anchors[-1] - cfg.sed_lead + cfg.sed_window_t
    n_bins = cfg.sed_cells * cfg.sed_cells * 4
    hist = np.zeros((t_hi - t_lo, len(offs), n_bins))
    for t in range(max(t_lo, 0), min(t_hi, labeler.samples.shape[0])):
        for o, (ox, oy) in enumerate(offs):
            cx = int(np.clip(ix + ox, 0, labeler.samples.shape[1] - 1))
            cy = int(np.clip(iy + oy, 0, labeler.samples.shape[2] - 1))
            hist[t - t_lo, o] = labeler.cell_histogram(t, cx, cy, cfg.sed_patch, cfg.sed_cells)
    cum = np.concatenate([np.zeros((1,) + hist.shape[1:]), np.cumsum(hist, axis=0)])
    feats = []
    for a in anchors:
        lo = a - cfg.sed_lead - t_lo
        feats.append((cum[lo + cfg.sed_window_t] - cum[lo]) / cfg.sed_window_t)
    return np.concatenate(feats, axis=0)


def infer_sed(
    disc: Discriminator,
    volume: GprVolume,
    x0: int,
    y0: int,
    cfg: PipelineConfig,
    labeler: SedLabeler | None = None,
) -> float:
    """Descriptors at regular depth anchors across a spatial offset grid
    (14 x 25 = 350 by default); the statistic is the top-25 sum of their
    classifier scores."""
    disc._require("svm")
    if labeler is None:
        labeler = SedLabeler(volume.samples, cfg.sed_edge_threshold)
    feats = _sed_feature_stack(labeler, x0, y0, cfg)
    stats = svm_decision(disc.models["svm"], feats)
    return _top_sum(stats, cfg.sed_top_stats)


# ---------------------------------------------------------------------------
# Dispatch and fusion
# ---------------------------------------------------------------------------

_TRAINERS = {
    "ehd": _train_ehd,
    "lg": _train_lg,
    "gprhog": _train_gprhog,
    "sed": _train_sed,
}


def train_discriminator(
    kind: str,
    train_labeled: list[LabeledAlarm],
    prepared: dict[str, PreparedLane],
    cfg: PipelineConfig,
    seed: int,
) -> Discriminator:
    if kind not in _TRAINERS:
        raise DataError(f"unknown discriminator kind {kind!r}; expected one of {KINDS}")
    if not any(la.is_hit for la in train_labeled):
        raise DataError("training alarms contain no threats")
    if not any(not la.is_hit for la in train_labeled):
        raise DataError("training alarms contain no non-threats")
    return _TRAINERS[kind](train_labeled, prepared, cfg, seed)


def infer_lane(
    disc: Discriminator,
    prepared: PreparedLane,
    alarms: list[Alarm],
    cfg: PipelineConfig,
) -> np.ndarray:
    """Decision statistics for every alarm of one prepared lane."""
    stats = np.empty(len(alarms))
    sed_labeler = None
    if disc.kind == "sed":
        sed_labeler = SedLabeler(prepared.volume.samples, cfg.sed_edge_threshold)
    for i, alarm in enumerate(alarms):
        if disc.kind == "ehd":
            stats[i] = infer_ehd(disc, standard_cube(prepared.volume, alarm, cfg), cfg)
        elif disc.kind == "lg":
            stats[i] = infer_lg(disc, standard_cube(prepared.volume, alarm, cfg), cfg)
        elif disc.kind == "gprhog":
            stats[i] = infer_gprhog(disc, standard_cube(prepared.volume_ds, alarm, cfg), cfg)
        elif disc.kind == "sed":
            vol = prepared.volume
            ix = meters_to_index(alarm.x_m, vol.dx, vol.shape[1])
            iy = meters_to_index(alarm.y_m, vol.dy, vol.shape[2])
            stats[i] = infer_sed(disc, vol, ix, iy, cfg, labeler=sed_labeler)
        else:
            raise DataError(f"unknown discriminator kind {disc.kind!r}")
    return stats


def fit_fusion_platt(rows, kinds=KINDS, lane_id: str | None = None) -> dict[str, PlattParams]:
    """Per-discriminator Platt parameters from a single lane's rows."""
    if lane_id is None:
        by_lane = {}
        for r in rows:
            by_lane.setdefault(r.alarm.lane_id, []).append(r.is_hit)
        candidates = [l for l in sorted(by_lane) if len(set(by_lane[l])) == 2]
        if not candidates:
            raise DataError("no lane offers both classes for Platt fitting")
        lane_id = candidates[0]
    lane_rows = [r for r in rows if r.alarm.lane_id == lane_id]
    if not lane_rows:
        raise DataError(f"no rows from lane {lane_id!r}")
    labels = [r.is_hit for r in lane_rows]
    out = {}
    for kind in kinds:
        try:
            stats = [r.stats[kind] for r in lane_rows]
        except KeyError:
            raise DataError(f"rows missing {kind} statistics for fusion")
        out[kind] = platt_fit(stats, labels)
    return out


def fuse_discriminators(stats, platt_params) -> np.ndarray:
    """Product of the Platt-calibrated statistics: one row of stats per
    discriminator, one PlattParams per row."""
    stats = np.asarray(stats, dtype=np.float64)
    if stats.ndim != 2 or stats.shape[0] != len(platt_params):
        raise DataError(
            f"need one statistics row per discriminator: {stats.shape} vs {len(platt_params)}"
        )
    fused = np.ones(stats.shape[1])
    for row, params in zip(stats, platt_params):
        fused *= platt_apply(params, row)
    return fused


def apply_fusion(rows, platt_by_kind: dict[str, PlattParams], kinds=KINDS) -> None:
    """Attach the fused statistic to every row, in place."""
    for r in rows:
        missing = [k for k in kinds if k not in r.stats]
        if missing:
            raise DataError(f"row missing discriminator statistics {missing}")
    stats = np.array([[r.stats[k] for r in rows] for k in kinds])
    fused = fuse_discriminators(stats, [platt_by_kind[k] for k in kinds])
    for r, f in zip(rows, fused):
        r.stats["fused"] = float(f)
