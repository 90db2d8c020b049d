import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gprbtd.errors import DataError
from gprbtd.model import (
    Alarm,
    DepthCategory,
    GroundTruthEntry,
    LaneDataset,
    Metal,
    Source,
    alarm_distance,
    extract_cube,
    index_to_meters,
    read_alarm_csv,
    read_lane,
    read_truth_csv,
    write_alarm_csv,
    write_lane,
    write_truth_csv,
)

from conftest import make_alarm, make_volume


class TestExtractCube:
    def test_identity_full_volume(self, rng):
        vol = make_volume(rng.normal(size=(6, 5, 7)))
        center = Alarm("lane00", index_to_meters(2, vol.dx), index_to_meters(3, vol.dy),
                       1.0, Source.F2)
        cube = extract_cube(vol, center, (6, 5, 7), t_anchor=0)
        np.testing.assert_array_equal(cube.samples, vol.samples)

    def test_requested_extent_is_honored(self, rng):
        vol = make_volume(rng.normal(size=(100, 20, 30)))
        alarm = make_alarm(x_m=0.5, y_m=0.75)
        cube = extract_cube(vol, alarm, (60, 15, 15), t_anchor=10)
        assert cube.extent == (60, 15, 15)

    def test_edge_padding_matches_index_arithmetic(self, rng):
        # alarm 3 channels from the cross-track edge: columns ix-7..ix+7
        # requested, 4 of them (-4..-1) fall outside and must be zero.
        vol = make_volume(rng.normal(size=(20, 12, 20)) + 5.0)
        ix = 3
        alarm = make_alarm(x_m=index_to_meters(ix, vol.dx), y_m=index_to_meters(10, vol.dy))
        cube = extract_cube(vol, alarm, (20, 15, 15), t_anchor=0)
        assert np.all(cube.samples[:, :4, :] == 0.0)
        # oracle: direct index enumeration over the in-bounds region
        for cx in range(4, 15):
            for cy in range(15):
                src_x, src_y = ix - 7 + cx, 10 - 7 + cy
                np.testing.assert_array_equal(
                    cube.samples[:, cx, cy], vol.samples[:, src_x, src_y]
                )

    def test_translation_consistency(self, rng):
        vol = make_volume(rng.normal(size=(10, 9, 30)))
        a1 = make_alarm(x_m=index_to_meters(4, vol.dx), y_m=index_to_meters(12, vol.dy))
        a2 = make_alarm(x_m=index_to_meters(4, vol.dx), y_m=index_to_meters(15, vol.dy))
        c1 = extract_cube(vol, a1, (10, 5, 9), 0)
        c2 = extract_cube(vol, a2, (10, 5, 9), 0)
        np.testing.assert_array_equal(c1.samples[:, :, 3:], c2.samples[:, :, :-3])

    def test_zero_padding_never_alters_inbounds(self, rng):
        vol = make_volume(rng.normal(size=(8, 6, 6)))
        alarm = make_alarm(x_m=index_to_meters(0, vol.dx), y_m=index_to_meters(0, vol.dy))
        cube = extract_cube(vol, alarm, (8, 7, 7), 0)
        # in-bounds block is byte-identical to the source region
        np.testing.assert_array_equal(cube.samples[:, 3:, 3:], vol.samples[:, :4, :4])

    def test_out_of_lane_alarm_rejected(self, rng):
        vol = make_volume(rng.normal(size=(8, 6, 6)))
        with pytest.raises(DataError):
            extract_cube(vol, make_alarm(x_m=5.0, y_m=0.1), (4, 4, 4), 0)

    def test_oversize_extent_rejected(self, rng):
        vol = make_volume(rng.normal(size=(8, 6, 6)))
        with pytest.raises(DataError):
            extract_cube(vol, make_alarm(x_m=0.1, y_m=0.1), (17, 4, 4), 0)


class TestAlarmDistance:
    def test_zero_for_identical(self):
        a = make_alarm()
        assert alarm_distance(a, a) == 0.0

    def test_3_4_5_triangle(self):
        a = make_alarm(x_m=1.0, y_m=1.0)
        b = make_alarm(x_m=1.3, y_m=1.4)
        assert alarm_distance(a, b) == pytest.approx(0.5, abs=1e-15)

    def test_matches_direct_formula(self, rng):
        for _ in range(50):
            x1, y1, x2, y2 = rng.uniform(0, 10, size=4)
            a, b = make_alarm(x_m=x1, y_m=y1), make_alarm(x_m=x2, y_m=y2)
            expected = np.sqrt((x1 - x2) ** 2 + (y1 - y2) ** 2)
            assert abs(alarm_distance(a, b) - expected) <= 1e-12

    def test_mismatched_lanes_rejected(self):
        a = make_alarm(lane_id="lane00")
        b = Alarm("lane01", 0.5, 0.5, 1.0, Source.CCY)
        with pytest.raises(DataError):
            alarm_distance(a, b)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 100), st.floats(0, 100)), min_size=3, max_size=3))
    def test_symmetry_and_triangle_inequality(self, coords):
        a, b, c = (make_alarm(x_m=x, y_m=y) for x, y in coords)
        assert alarm_distance(a, b) == alarm_distance(b, a)
        assert alarm_distance(a, c) <= alarm_distance(a, b) + alarm_distance(b, c) + 1e-9


class TestContainers:
    def test_lane_roundtrip(self, rng, tmp_path):
        vol = make_volume(rng.normal(size=(6, 4, 5)).astype(np.float32), ground_index=2)
        truth = [GroundTruthEntry("lane07", 0.1, 0.2, DepthCategory.DEEP, Metal.NON_METAL)]
        lane = LaneDataset("lane07", vol, truth)
        write_lane(lane, tmp_path / "lane07.json")
        write_truth_csv(truth, tmp_path / "truth.csv")
        back = read_lane(tmp_path / "lane07.json", tmp_path / "truth.csv")
        assert back.lane_id == "lane07"
        assert back.volume.ground_index == 2
        assert back.truth == truth
        np.testing.assert_array_equal(back.volume.samples, vol.samples)
        assert back.area_m2 == pytest.approx(lane.area_m2)

    def test_sidecar_is_t_fastest(self, tmp_path):
        samples = np.arange(2 * 2 * 2, dtype=np.float64).reshape((2, 2, 2))
        lane = LaneDataset("lane00", make_volume(samples))
        write_lane(lane, tmp_path / "lane00.json")
        raw = np.fromfile(tmp_path / "lane00.f32", dtype="<f4")
        # t fastest, then x, then y
        expected = [samples[t, x, y] for y in range(2) for x in range(2) for t in range(2)]
        np.testing.assert_array_equal(raw, expected)

    def test_alarm_csv_roundtrip(self, tmp_path):
        alarms = [make_alarm(statistic=1.25), make_alarm(x_m=0.7, source=Source.CCY)]
        write_alarm_csv(alarms, tmp_path / "alarms.csv")
        assert read_alarm_csv(tmp_path / "alarms.csv") == alarms

    def test_area_invariant_enforced(self, rng):
        vol = make_volume(rng.normal(size=(4, 4, 4)))
        with pytest.raises(DataError):
            LaneDataset("lane00", vol, [], area_m2=123.0)
