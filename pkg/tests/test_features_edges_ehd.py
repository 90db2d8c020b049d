import numpy as np
import pytest

from gprbtd.errors import DataError
from gprbtd.features import (
    EHD_EXTENT,
    EdgeLabel,
    FeatureKind,
    SOBEL_KERNELS,
    ehd_feature,
    ehd_features_at_depths,
    sobel_edges,
)
from gprbtd.model import DataCube


def _oracle_label(image, i, j, threshold):
    """Direct 3x3 correlation at one pixel."""
    strengths = []
    for kernel in SOBEL_KERNELS:
        acc = 0.0
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                acc += kernel[di + 1, dj + 1] * image[i + di, j + dj]
        strengths.append(abs(acc))
    best = int(np.argmax(strengths))
    return best if strengths[best] > threshold else int(EdgeLabel.NONE)


class TestSobelEdges:
    def test_constant_image_all_none(self):
        labels = sobel_edges(np.full((6, 6), 2.0), 0.5).labels
        assert (labels == EdgeLabel.NONE).all()

    def test_vertical_step_edge(self):
        image = np.zeros((8, 8))
        image[:, 4:] = 10.0
        labels = sobel_edges(image, 1.0).labels
        # interior pixels adjacent to the step are vertical edges
        assert (labels[1:-1, 3:5] == EdgeLabel.V).all()
        # oracle: every interior pixel agrees with direct 3x3 correlation
        for i in range(1, 7):
            for j in range(1, 7):
                assert labels[i, j] == _oracle_label(image, i, j, 1.0)

    def test_tie_breaks_to_lowest_kernel_index(self):
        # the plane i + 3j ties the vertical and anti-diagonal kernels at the
        # maximum response (24 vs 8 and 12); V (lowest index) must win
        image = np.add.outer(np.arange(8, dtype=float), 3.0 * np.arange(8, dtype=float))
        strengths = [
            abs(sum(SOBEL_KERNELS[k][di + 1, dj + 1] * image[3 + di, 3 + dj]
                    for di in (-1, 0, 1) for dj in (-1, 0, 1)))
            for k in range(4)
        ]
        assert strengths[0] == strengths[3] > max(strengths[1], strengths[2])
        labels = sobel_edges(image, 1.0).labels
        assert labels[3, 3] == EdgeLabel.V

    def test_border_pixels_are_none(self, rng):
        labels = sobel_edges(rng.normal(size=(7, 9)) * 100, 0.0).labels
        assert (labels[0, :] == EdgeLabel.NONE).all()
        assert (labels[-1, :] == EdgeLabel.NONE).all()
        assert (labels[:, 0] == EdgeLabel.NONE).all()
        assert (labels[:, -1] == EdgeLabel.NONE).all()

    def test_matches_oracle_on_random_images(self, rng):
        image = rng.normal(size=(9, 9)) * 5
        labels = sobel_edges(image, 2.0).labels
        for i in range(1, 8):
            for j in range(1, 8):
                assert labels[i, j] == _oracle_label(image, i, j, 2.0)


class TestEhdFeature:
    def test_output_length_35(self, rng):
        cube = DataCube(rng.normal(size=EHD_EXTENT), (0, 0, 0))
        fv = ehd_feature(cube, FeatureKind.EHD_DT, 10.0)
        assert fv.values.shape == (35,)

    def test_constant_cube_mass_in_non_edge_bin(self):
        cube = DataCube(np.full(EHD_EXTENT, 3.0), (0, 0, 0))
        fv = ehd_feature(cube, FeatureKind.EHD_CT, 1.0)
        hist = fv.values.reshape(7, 5)
        np.testing.assert_allclose(hist[:, 4], 1.0)
        np.testing.assert_allclose(hist[:, :4], 0.0)

    def test_bins_sum_to_one(self, rng):
        for _ in range(10):
            cube = DataCube(rng.normal(size=EHD_EXTENT) * 20, (0, 0, 0))
            for direction in (FeatureKind.EHD_DT, FeatureKind.EHD_CT):
                hist = ehd_feature(cube, direction, 5.0).values.reshape(7, 5)
                np.testing.assert_allclose(hist.sum(axis=1), 1.0, atol=1e-12)

    def test_wrong_extent_rejected(self, rng):
        with pytest.raises(DataError):
            ehd_feature(DataCube(rng.normal(size=(50, 15, 15)), (0, 0, 0)),
                        FeatureKind.EHD_DT, 1.0)

    def test_downtrack_translation_invariance_within_subimage(self, rng):
        # a pattern fully interior to the plane shifted down-track keeps the
        # DT histograms (labels are counted over whole rows)
        base = np.zeros(EHD_EXTENT)
        patch = rng.normal(size=(6, 4)) * 30
        base[20:26, 7, 4:8] = patch
        shifted = np.zeros(EHD_EXTENT)
        shifted[20:26, 7, 7:11] = patch
        f1 = ehd_feature(DataCube(base, (0, 0, 0)), FeatureKind.EHD_DT, 5.0)
        f2 = ehd_feature(DataCube(shifted, (0, 0, 0)), FeatureKind.EHD_DT, 5.0)
        np.testing.assert_allclose(f1.values, f2.values, atol=1e-12)


class TestEhdBatch:
    def test_batch_equals_per_window_extraction(self, rng):
        tall = rng.normal(size=(130, 15, 15)) * 8
        t_starts = [0, 25, 50, 75, 100]  # last window runs past T and pads
        batch = ehd_features_at_depths(tall, t_starts, 6.0)
        padded = np.concatenate([tall, np.zeros((30, 15, 15))])
        for k, t0 in enumerate(t_starts):
            window = DataCube(padded[t0 : t0 + 60], (t0, 0, 0))
            for direction in (FeatureKind.EHD_DT, FeatureKind.EHD_CT):
                single = ehd_feature(window, direction, 6.0)
                np.testing.assert_allclose(
                    batch[direction][k].values, single.values, atol=1e-12
                )
