"""Halo-based alarm labeling, FAR-per-square-meter ROC curves, AUC, and the
leave-one-lane-out cross-validation protocol."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import PipelineConfig
from .errors import DataError
from .model import Alarm, DepthCategory, GroundTruthEntry, LaneDataset

__all__ = [
    "LabeledAlarm",
    "StatRow",
    "FoldResult",
    "RocCurve",
    "label_alarms",
    "roc",
    "roc_from_rows",
    "auc",
    "cross_validate",
    "aggregate_rows",
    "stratified_roc",
    "write_roc_csv",
    "read_roc_csv",
    "roc_summary",
    "write_stats_csv",
    "read_stats_csv",
]


@dataclass(frozen=True)
class LabeledAlarm:
    """An alarm plus its halo verdict: hit alarms credit their nearest threat."""

    alarm: Alarm
    is_hit: bool
    threat: GroundTruthEntry | None = None


@dataclass
class StatRow:
    """One scored alarm in a cross-validation result table."""

    alarm: Alarm
    is_hit: bool
    threat: GroundTruthEntry | None
    stats: dict[str, float] = field(default_factory=dict)


@dataclass
class FoldResult:
    test_lane: str
    rows: list[StatRow]
    train_row_lanes: list[str] = field(default_factory=list)  # provenance audit trail


@dataclass(frozen=True)
class RocCurve:
    """Ordered (false alarms per m^2, probability of detection) points."""

    points: np.ndarray  # (n, 2): far ascending, pd ascending
    area_m2: float
    n_threats: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        object.__setattr__(self, "points", pts)
        if pts.size:
            far, pd = pts[:, 0], pts[:, 1]
            if (np.diff(far) < 0).any() or (np.diff(pd) < 0).any():
                raise DataError("ROC points must be non-decreasing in far and pd")
            if pd.min() < 0 or pd.max() > 1:
                raise DataError("pd must lie in [0, 1]")

    @property
    def max_pd(self) -> float:
        return float(self.points[-1, 1]) if self.points.size else 0.0

    @property
    def max_far(self) -> float:
        return float(self.points[-1, 0]) if self.points.size else 0.0


def label_alarms(
    alarms: list[Alarm], truth: list[GroundTruthEntry], halo_m: float = 0.25
) -> tuple[list[LabeledAlarm], list[GroundTruthEntry]]:
    """Assign each alarm to its nearest same-lane threat within halo_m.

    Ties go to the first entry in truth order.  Returns the labeled alarms
    plus the threats that no alarm credits (missed at every threshold).
    """
    if halo_m <= 0:
        raise DataError("halo_m must be positive")
    labeled = []
    credited: set[int] = set()
    for alarm in alarms:
        best, best_d = None, np.inf
        for t_idx, entry in enumerate(truth):
            if entry.lane_id != alarm.lane_id:
                continue
            d = np.hypot(alarm.x_m - entry.x_m, alarm.y_m - entry.y_m)
            if d <= halo_m and d < best_d:
                best, best_d = t_idx, d
        if best is None:
            labeled.append(LabeledAlarm(alarm, False))
        else:
            credited.add(best)
            labeled.append(LabeledAlarm(alarm, True, truth[best]))
    missed = [t for i, t in enumerate(truth) if i not in credited]
    return labeled, missed


def _threat_key(entry: GroundTruthEntry):
    return (entry.lane_id, entry.x_m, entry.y_m)


def _curve_points(hit_stats_by_threat, false_stats, n_threats, area_m2):
    """Sweep distinct statistics descending; per distinct FAR keep the best pd."""
    best_per_threat = np.array(sorted(hit_stats_by_threat.values()), dtype=np.float64)
    false_stats = np.sort(np.asarray(false_stats, dtype=np.float64))
    all_stats = np.concatenate([best_per_threat, false_stats])
    if all_stats.size == 0:
        return np.empty((0, 2))
    points = {}
    for thr in np.unique(all_stats)[::-1]:
        detected = best_per_threat.size - np.searchsorted(best_per_threat, thr, side="left")
        false = false_stats.size - np.searchsorted(false_stats, thr, side="left")
        far = false / area_m2
        points[far] = detected / n_threats  # pd grows as thr drops; last write wins
    fars = sorted(points)
    return np.array([[f, points[f]] for f in fars])


def roc(
    labeled: list[LabeledAlarm],
    n_threats: int,
    area_m2: float,
    stat_fn=None,
) -> RocCurve:
    """ROC over a labeled alarm list.  A threat counts detected at a
    threshold when at least one alarm crediting it scores at or above it;
    FAR is false alarms at or above the threshold per square meter."""
    if n_threats <= 0:
        raise DataError("n_threats must be positive")
    if area_m2 <= 0:
        raise DataError("area_m2 must be positive")
    stat_fn = stat_fn or (lambda la: la.alarm.statistic)
    hit_best: dict = {}
    false_stats = []
    for la in labeled:
        s = float(stat_fn(la))
        if la.is_hit:
            key = _threat_key(la.threat)
            hit_best[key] = max(hit_best.get(key, -np.inf), s)
        else:
            false_stats.append(s)
    return RocCurve(_curve_points(hit_best, false_stats, n_threats, area_m2), area_m2, n_threats)


def _step_pd(curve: RocCurve, far: float) -> float:
    """pd achievable at FAR budget `far` (step interpolation, 0 before the curve)."""
    pts = curve.points
    if pts.size == 0:
        return 0.0
    i = np.searchsorted(pts[:, 0], far, side="right") - 1
    return float(pts[i, 1]) if i >= 0 else 0.0


def auc(curve: RocCurve, far_lo: float, far_hi: float) -> float:
    """Mean pd over [far_lo, far_hi] of the step-interpolated curve."""
    if not far_lo < far_hi:
        raise DataError("require far_lo < far_hi")
    pts = curve.points
    if pts.size == 0 or pts[0, 0] >= far_hi:
        warnings.warn("ROC curve empty over the requested FAR range; AUC = 0")
        return 0.0
    breaks = [far_lo] + [float(f) for f in pts[:, 0] if far_lo < f < far_hi] + [far_hi]
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        total += _step_pd(curve, a) * (b - a)
    return total / (far_hi - far_lo)


def roc_from_rows(rows: list[StatRow], stat_key: str, n_threats: int, area_m2: float) -> RocCurve:
    labeled = [LabeledAlarm(_with_stat(r, stat_key), r.is_hit, r.threat) for r in rows]
    return roc(labeled, n_threats, area_m2)


def stratified_roc(
    rows: list[StatRow],
    stratum: DepthCategory,
    stat_key: str,
    n_threats_stratum: int,
    area_m2: float,
) -> RocCurve:
    """ROC restricted to threats of one burial-depth stratum.

    False alarms are unchanged; hit alarms crediting out-of-stratum threats
    are dropped (they are neither detections here nor false alarms).  Models
    are not retrained.
    """
    if n_threats_stratum <= 0:
        raise DataError(f"no threats in stratum {stratum}")
    kept = []
    for r in rows:
        if r.is_hit and r.threat.depth_category is not stratum:
            continue
        kept.append(LabeledAlarm(_with_stat(r, stat_key), r.is_hit, r.threat))
    return roc(kept, n_threats_stratum, area_m2)


def _with_stat(row: StatRow, stat_key: str) -> Alarm:
    if stat_key not in row.stats:
        raise DataError(f"row missing statistic {stat_key!r}")
    a = row.alarm
    return Alarm(a.lane_id, a.x_m, a.y_m, row.stats[stat_key], a.source)


def cross_validate(
    lanes: list[LaneDataset],
    alarms_by_lane: dict[str, list[Alarm]],
    disc_kind: str,
    cfg: PipelineConfig,
    seed: int,
) -> list[FoldResult]:
    """Leave-one-lane-out: train on the other lanes' alarms, score the
    held-out lane's alarms.  Each lane is the test lane exactly once."""
    from . import discriminate  # deferred: discriminate depends on this module

    if len(lanes) < 2:
        raise DataError("cross-validation needs at least 2 lanes")
    lane_ids = [lane.lane_id for lane in lanes]
    if len(set(lane_ids)) != len(lane_ids):
        raise DataError("duplicate lane ids")
    prepared = {lane.lane_id: discriminate.prepare_lane(lane, cfg) for lane in lanes}
    fold_seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(len(lanes))]

    folds = []
    for fold_idx, test_lane in enumerate(lanes):
        train_labeled = []
        for lane in lanes:
            if lane.lane_id == test_lane.lane_id:
                continue
            labeled, _ = label_alarms(alarms_by_lane[lane.lane_id], lane.truth, cfg.halo_m)
            train_labeled.extend(labeled)
        disc = discriminate.train_discriminator(
            disc_kind, train_labeled, prepared, cfg, fold_seeds[fold_idx]
        )
        if test_lane.lane_id in disc.provenance_lanes:
            raise DataError(
                f"provenance violation: test lane {test_lane.lane_id} fed the training set"
            )
        test_labeled, _ = label_alarms(
            alarms_by_lane[test_lane.lane_id], test_lane.truth, cfg.halo_m
        )
        stats = discriminate.infer_lane(disc, prepared[test_lane.lane_id],
                                        [la.alarm for la in test_labeled], cfg)
        rows = [
            StatRow(la.alarm, la.is_hit, la.threat, {disc_kind: float(s)})
            for la, s in zip(test_labeled, stats)
        ]
        folds.append(FoldResult(test_lane.lane_id, rows, sorted(disc.provenance_lanes)))
    return folds


def aggregate_rows(folds: list[FoldResult]) -> list[StatRow]:
    """All test-lane rows in fold order; exactly one row per test alarm."""
    out = []
    for fold in folds:
        out.extend(fold.rows)
    return out


# ---------------------------------------------------------------------------
# External formats
# ---------------------------------------------------------------------------

def write_roc_csv(curve: RocCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["far_per_m2", "pd"])
        for far, pd in curve.points:
            w.writerow([repr(float(far)), repr(float(pd))])


def read_roc_csv(path, area_m2: float = 1.0, n_threats: int = 1) -> RocCurve:
    pts = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            pts.append([float(row["far_per_m2"]), float(row["pd"])])
    return RocCurve(np.array(pts).reshape(-1, 2), area_m2, n_threats)


def roc_summary(curve: RocCurve, n_false: int | None = None) -> dict:
    far_hi = curve.max_far if curve.max_far > 0 else 1.0
    return {
        "auc": auc(curve, 0.0, far_hi) if curve.points.size else 0.0,
        "max_pd": curve.max_pd,
        "n_threats": curve.n_threats,
        "n_false": n_false,
        "area_m2": curve.area_m2,
    }


_STAT_COLUMNS = ["stat_ehd", "stat_lg", "stat_gprhog", "stat_sed", "stat_fused"]
_KEY_BY_COLUMN = {c: c.removeprefix("stat_") for c in _STAT_COLUMNS}


def write_stats_csv(rows: list[StatRow], path) -> None:
    """Decision-statistics table, one row per scored alarm."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lane_id", "x_m", "y_m", "is_threat", "depth_category"] + _STAT_COLUMNS)
        for r in rows:
            depth = r.threat.depth_category.value if r.threat is not None else ""
            cells = [r.alarm.lane_id, repr(r.alarm.x_m), repr(r.alarm.y_m),
                     int(r.is_hit), depth]
            for col in _STAT_COLUMNS:
                key = _KEY_BY_COLUMN[col]
                cells.append(repr(r.stats[key]) if key in r.stats else "")
            w.writerow(cells)


def read_stats_csv(path) -> list[StatRow]:
    """Rows from a stats CSV.  Threat identity beyond the depth category is
    not stored in the file; hit rows get a synthetic truth entry at the alarm
    location, which keeps per-threat accounting usable for scoring."""
    from .model import Metal, Source

    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            stats = {}
            for col in _STAT_COLUMNS:
                if row[col] != "":
                    stats[_KEY_BY_COLUMN[col]] = float(row[col])
            is_hit = bool(int(row["is_threat"]))
            alarm = Alarm(row["lane_id"], float(row["x_m"]), float(row["y_m"]),
                          next(iter(stats.values()), 0.0), Source.FUSED_PRESCREEN)
            threat = None
            if is_hit:
                threat = GroundTruthEntry(
                    row["lane_id"], float(row["x_m"]), float(row["y_m"]),
                    DepthCategory(row["depth_category"]), Metal.METAL,
                )
            out.append(StatRow(alarm, is_hit, threat, stats))
    return out
