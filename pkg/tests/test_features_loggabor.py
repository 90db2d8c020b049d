import numpy as np
import pytest

from gprbtd.config import PipelineConfig
from gprbtd.errors import DataError
from gprbtd.features import (
    build_log_gabor_bank,
    lg_feature,
    lg_feature_matrix,
    log_gabor_response,
)
from gprbtd.model import DataCube


class TestBankFormula:
    def test_unit_response_at_center(self):
        for rho0 in (0.04, 0.1, 0.35):
            for theta0 in np.deg2rad([0, 40, 160]):
                v = log_gabor_response(rho0, theta0, rho0, theta0, 0.65, np.deg2rad(12))
                assert v == pytest.approx(1.0, abs=1e-12)

    def test_half_exponent_at_radial_spread(self):
        rho0, theta0 = 0.2, np.deg2rad(60)
        v = log_gabor_response(rho0 * 0.65, theta0, rho0, theta0, 0.65, np.deg2rad(12))
        assert v == pytest.approx(np.exp(-0.5), abs=1e-9)

    def test_half_exponent_at_angular_spread(self):
        rho0, theta0 = 0.2, np.deg2rad(60)
        st = np.deg2rad(12)
        v = log_gabor_response(rho0, theta0 + st, rho0, theta0, 0.65, st)
        assert v == pytest.approx(np.exp(-0.5), abs=1e-9)

    def test_angle_wraparound(self):
        # 359 degrees is 1 degree away from 0, not 359
        v_near = log_gabor_response(0.2, np.deg2rad(359), 0.2, 0.0, 0.65, np.deg2rad(12))
        v_far = log_gabor_response(0.2, np.deg2rad(90), 0.2, 0.0, 0.65, np.deg2rad(12))
        assert v_near > 0.99 > v_far


class TestBank:
    def test_36_filters_20_degree_spacing(self):
        bank = build_log_gabor_bank(32, 32)
        assert bank.filters.shape == (36, 32, 32)
        spacing = np.diff(np.rad2deg(bank.theta0))
        np.testing.assert_allclose(spacing, 20.0)
        assert np.rad2deg(bank.theta0[-1]) == pytest.approx(160.0)
        assert bank.rho0.shape == (4,)
        np.testing.assert_allclose(bank.rho0[1:] / bank.rho0[:-1], 2.0)

    def test_dc_bin_zero(self):
        bank = build_log_gabor_bank(16, 16)
        assert (bank.filters[:, 0, 0] == 0.0).all()

    def test_minimum_spectrum_size(self):
        with pytest.raises(DataError):
            build_log_gabor_bank(4, 16)


class TestFeatureMatrix:
    def test_shape_15x144(self, rng):
        cube = DataCube(rng.normal(size=(40, 18, 18)), (0, 0, 0))
        assert lg_feature_matrix(cube).shape == (15, 144)

    def test_zero_cube_gives_zero_matrix(self):
        cube = DataCube(np.zeros((30, 18, 18)), (0, 0, 0))
        np.testing.assert_array_equal(lg_feature_matrix(cube), 0.0)

    def test_parseval_against_spatial_convolution(self, rng):
        # frequency-domain filtering energy equals direct circular
        # convolution energy in the spatial domain
        h, w = 16, 9
        image = rng.normal(size=(h, w))
        bank = build_log_gabor_bank(h, w)
        for f in (0, 17, 35):
            response = np.fft.ifft2(np.fft.fft2(image) * bank.filters[f])
            freq_energy = np.abs(response).sum() * 0 + (np.abs(response) ** 2).sum()
            kernel = np.fft.ifft2(bank.filters[f])
            direct = np.zeros((h, w), dtype=complex)
            for m in range(h):
                for n in range(w):
                    acc = 0.0j
                    for a in range(h):
                        for b in range(w):
                            acc += image[a, b] * kernel[(m - a) % h, (n - b) % w]
                    direct[m, n] = acc
            direct_energy = (np.abs(direct) ** 2).sum()
            assert freq_energy == pytest.approx(direct_energy, rel=1e-6)

    def test_no_dead_filter_on_noise(self, rng):
        cube = DataCube(rng.normal(size=(32, 18, 18)), (0, 0, 0))
        fv = lg_feature(lg_feature_matrix(cube))
        assert (fv.values > 0).all()

    def test_too_small_cube_rejected(self, rng):
        with pytest.raises(DataError):
            lg_feature_matrix(DataCube(rng.normal(size=(20, 8, 8)), (0, 0, 0)))


class TestLgFeature:
    def test_column_max(self, rng):
        matrix = rng.normal(size=(15, 144))
        fv = lg_feature(matrix)
        assert fv.values.shape == (144,)
        np.testing.assert_array_equal(fv.values, matrix.max(axis=0))

    def test_all_equal_column(self):
        matrix = np.full((15, 144), 2.5)
        np.testing.assert_array_equal(lg_feature(matrix).values, 2.5)

    def test_random_matrices_match_direct_scan(self, rng):
        for _ in range(20):
            matrix = rng.normal(size=(15, 144))
            expected = [max(matrix[:, c]) for c in range(144)]
            np.testing.assert_allclose(lg_feature(matrix).values, expected)
