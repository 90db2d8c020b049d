import numpy as np
import pytest

from gprbtd.errors import DataError
from gprbtd.evaluate import (
    LabeledAlarm,
    RocCurve,
    StatRow,
    auc,
    label_alarms,
    read_roc_csv,
    read_stats_csv,
    roc,
    roc_from_rows,
    roc_summary,
    stratified_roc,
    write_roc_csv,
    write_stats_csv,
)
from gprbtd.model import Alarm, DepthCategory, GroundTruthEntry, Metal, Source


def _alarm(x, y, s, lane="l"):
    return Alarm(lane, x, y, s, Source.FUSED_PRESCREEN)


def _truth(x, y, lane="l", depth=DepthCategory.STANDARD):
    return GroundTruthEntry(lane, x, y, depth, Metal.METAL)


class TestLabelAlarms:
    def test_halo_boundary(self):
        truth = [_truth(1.0, 1.0)]
        inside, _ = label_alarms([_alarm(1.249, 1.0, 2.0)], truth, 0.25)
        outside, missed = label_alarms([_alarm(1.251, 1.0, 2.0)], truth, 0.25)
        assert inside[0].is_hit and not outside[0].is_hit
        assert missed == truth

    def test_no_alarms_all_missed(self):
        truth = [_truth(1.0, 1.0), _truth(2.0, 2.0)]
        labeled, missed = label_alarms([], truth, 0.25)
        assert labeled == [] and missed == truth

    def test_equidistant_alarm_credits_first_by_order(self):
        # exactly 1.0 m from both threats (integer coordinates, no float fuzz)
        truth = [_truth(1.0, 1.0), _truth(3.0, 1.0)]
        labeled, missed = label_alarms([_alarm(2.0, 1.0, 3.0)], truth, 1.5)
        assert labeled[0].threat == truth[0]
        assert missed == [truth[1]]

    def test_matches_exhaustive_assignment_oracle(self, rng):
        truth = [_truth(float(x), float(y)) for x, y in rng.uniform(0, 5, size=(8, 2))]
        alarms = [_alarm(float(x), float(y), float(s))
                  for x, y, s in rng.uniform(0, 5, size=(30, 3))]
        labeled, missed = label_alarms(alarms, truth, 0.4)
        for alarm, la in zip(alarms, labeled):
            dists = [np.hypot(alarm.x_m - t.x_m, alarm.y_m - t.y_m) for t in truth]
            in_halo = [i for i, d in enumerate(dists) if d <= 0.4]
            if not in_halo:
                assert not la.is_hit
            else:
                best = min(in_halo, key=lambda i: dists[i])
                assert la.is_hit and la.threat == truth[best]
        credited = {id(la.threat) for la in labeled if la.is_hit}
        assert set(map(id, missed)) == {id(t) for t in truth if id(t) not in credited}

    def test_cross_lane_isolation(self):
        truth = [_truth(1.0, 1.0, lane="other")]
        labeled, missed = label_alarms([_alarm(1.0, 1.0, 2.0)], truth, 0.25)
        assert not labeled[0].is_hit
        assert missed == truth


def _make_labeled(hit_stats, false_stats):
    labeled = []
    for i, s in enumerate(hit_stats):
        t = _truth(float(i), 0.0)
        labeled.append(LabeledAlarm(_alarm(float(i), 0.0, s), True, t))
    for j, s in enumerate(false_stats):
        labeled.append(LabeledAlarm(_alarm(float(j), 3.0, s), False))
    return labeled


def _roc_oracle(hit_stats, false_stats, n_threats, area):
    """Independent threshold enumeration over the raw statistic lists."""
    points = {}
    for thr in sorted(set(hit_stats) | set(false_stats), reverse=True):
        pd = sum(1 for s in hit_stats if s >= thr) / n_threats
        far = sum(1 for s in false_stats if s >= thr) / area
        points[far] = max(points.get(far, 0.0), pd)
    return sorted(points.items())


class TestRoc:
    def test_perfect_ranking(self):
        labeled = _make_labeled([5.0, 4.0], [1.0, 0.5])
        curve = roc(labeled, 2, 10.0)
        assert curve.points[0][0] == 0.0 and curve.points[0][1] == 1.0

    def test_hand_enumerated_curve(self):
        labeled = _make_labeled([5.0, 3.0], [4.0, 1.0])
        curve = roc(labeled, 2, 10.0)
        np.testing.assert_allclose(
            curve.points, [[0.0, 0.5], [0.1, 1.0], [0.2, 1.0]]
        )

    def test_matches_threshold_enumeration_oracle(self, rng):
        for _ in range(50):
            n_hit = int(rng.integers(1, 6))
            n_false = int(rng.integers(0, 10))
            hits = list(rng.normal(size=n_hit))
            falses = list(rng.normal(size=n_false))
            curve = roc(_make_labeled(hits, falses), n_hit + 2, 7.0)
            expected = _roc_oracle(hits, falses, n_hit + 2, 7.0)
            np.testing.assert_allclose(curve.points, expected, atol=1e-12)

    def test_multiple_alarms_one_threat_counted_once(self):
        t = _truth(0.0, 0.0)
        labeled = [
            LabeledAlarm(_alarm(0.0, 0.0, 5.0), True, t),
            LabeledAlarm(_alarm(0.05, 0.0, 4.0), True, t),
        ]
        curve = roc(labeled, 1, 10.0)
        assert curve.max_pd == 1.0
        assert (curve.points[:, 1] <= 1.0).all()

    def test_monotone_transform_invariance(self, rng):
        hits = list(rng.normal(size=4))
        falses = list(rng.normal(size=8))
        base = roc(_make_labeled(hits, falses), 5, 3.0)
        for transform in (lambda s: 2 * s + 1, lambda s: s**3):
            curve = roc(
                _make_labeled([transform(s) for s in hits],
                              [transform(s) for s in falses]), 5, 3.0
            )
            np.testing.assert_allclose(curve.points, base.points, atol=1e-12)

    def test_zero_threats_rejected(self):
        with pytest.raises(DataError):
            roc([], 0, 1.0)

    def test_pd_and_far_nondecreasing(self, rng):
        curve = roc(_make_labeled(list(rng.normal(size=5)), list(rng.normal(size=15))),
                    6, 4.0)
        assert (np.diff(curve.points[:, 0]) >= 0).all()
        assert (np.diff(curve.points[:, 1]) >= 0).all()


def _auc_oracle(curve, lo, hi):
    """Integrate the step curve by sampling each sub-interval's midpoint."""
    pts = [(float(f), float(p)) for f, p in curve.points]

    def pd_at(f):
        best = 0.0
        for far, pd in pts:
            if far <= f:
                best = pd
        return best

    breaks = sorted({lo, hi} | {f for f, _ in pts if lo < f < hi})
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        total += pd_at(0.5 * (a + b)) * (b - a)
    return total / (hi - lo)


class TestAuc:
    def test_constant_one(self):
        curve = RocCurve(np.array([[0.0, 1.0]]), 1.0, 1)
        assert auc(curve, 0.0, 5.0) == pytest.approx(1.0)

    def test_constant_half(self):
        curve = RocCurve(np.array([[0.0, 0.5]]), 1.0, 2)
        assert auc(curve, 0.0, 2.0) == pytest.approx(0.5)

    def test_matches_fine_grid_oracle(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 12))
            fars = np.sort(rng.uniform(0, 3, size=n))
            pds = np.sort(rng.uniform(0, 1, size=n))
            curve = RocCurve(np.column_stack([fars, pds]), 1.0, 4)
            lo = float(rng.uniform(0, 1))
            hi = lo + float(rng.uniform(0.5, 3))
            got = auc(curve, lo, hi)
            assert got == pytest.approx(_auc_oracle(curve, lo, hi), abs=1e-9)
            assert 0.0 <= got <= 1.0

    def test_empty_range_warns_and_returns_zero(self):
        curve = RocCurve(np.array([[2.0, 1.0]]), 1.0, 1)
        with pytest.warns(UserWarning):
            assert auc(curve, 0.0, 1.0) == 0.0

    def test_bad_range_rejected(self):
        curve = RocCurve(np.array([[0.0, 1.0]]), 1.0, 1)
        with pytest.raises(DataError):
            auc(curve, 1.0, 1.0)


def _rows_with_strata(rng):
    rows = []
    for i in range(6):
        depth = DepthCategory.DEEP if i < 2 else DepthCategory.STANDARD
        t = _truth(float(i), 0.0, depth=depth)
        rows.append(StatRow(_alarm(float(i), 0.0, 0.0), True, t,
                            {"sed": float(rng.normal())}))
    for j in range(10):
        rows.append(StatRow(_alarm(float(j), 3.0, 0.0), False, None,
                            {"sed": float(rng.normal())}))
    return rows


class TestStratifiedRoc:
    def test_empty_stratum_rejected(self, rng):
        rows = [r for r in _rows_with_strata(rng)
                if r.threat is None or r.threat.depth_category is DepthCategory.STANDARD]
        with pytest.raises(DataError):
            stratified_roc(rows, DepthCategory.DEEP, "sed", 0, 5.0)

    def test_detection_counts_partition(self, rng):
        rows = _rows_with_strata(rng)
        area = 5.0
        overall = roc_from_rows(rows, "sed", 6, area)
        std = stratified_roc(rows, DepthCategory.STANDARD, "sed", 4, area)
        deep = stratified_roc(rows, DepthCategory.DEEP, "sed", 2, area)

        def detected(curve, n, far):
            pts = curve.points
            i = np.searchsorted(pts[:, 0], far, side="right") - 1
            return round(pts[i, 1] * n) if i >= 0 else 0

        thresholds = sorted({r.stats["sed"] for r in rows}, reverse=True)
        for thr in thresholds:
            far = sum(1 for r in rows if not r.is_hit and r.stats["sed"] >= thr) / area
            assert detected(overall, 6, far) == detected(std, 4, far) + detected(deep, 2, far)

    def test_false_alarm_axis_identical_across_strata(self, rng):
        rows = _rows_with_strata(rng)
        std = stratified_roc(rows, DepthCategory.STANDARD, "sed", 4, 5.0)
        deep = stratified_roc(rows, DepthCategory.DEEP, "sed", 2, 5.0)
        # strata drop hit rows only: both curves end at the full false-alarm
        # count, and every FAR value sits on the same count/area grid
        n_false = sum(1 for r in rows if not r.is_hit)
        assert std.max_far == pytest.approx(n_false / 5.0)
        assert deep.max_far == pytest.approx(n_false / 5.0)
        grid = {round(k / 5.0, 12) for k in range(n_false + 1)}
        assert {round(f, 12) for f in std.points[:, 0]} <= grid
        assert {round(f, 12) for f in deep.points[:, 0]} <= grid


class TestCsvRoundtrips:
    def test_roc_csv(self, tmp_path, rng):
        curve = roc(_make_labeled([2.0, 1.0], [1.5]), 3, 2.0)
        write_roc_csv(curve, tmp_path / "roc.csv")
        back = read_roc_csv(tmp_path / "roc.csv", area_m2=2.0, n_threats=3)
        np.testing.assert_array_equal(back.points, curve.points)

    def test_stats_csv(self, tmp_path, rng):
        rows = _rows_with_strata(rng)
        for r in rows:
            r.stats.update({"ehd": 1.0, "lg": 2.0, "gprhog": 3.0, "fused": 0.5})
        write_stats_csv(rows, tmp_path / "stats.csv")
        back = read_stats_csv(tmp_path / "stats.csv")
        assert len(back) == len(rows)
        for a, b in zip(rows, back):
            assert a.is_hit == b.is_hit
            assert a.alarm.x_m == b.alarm.x_m
            assert a.stats == b.stats

    def test_summary_fields(self, rng):
        curve = roc(_make_labeled([2.0], [1.0]), 1, 2.0)
        s = roc_summary(curve, n_false=1)
        assert set(s) == {"auc", "max_pd", "n_threats", "n_false", "area_m2"}
        assert s["max_pd"] == 1.0
