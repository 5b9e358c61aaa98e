import numpy as np
import pytest

from curvedither.baselines import (
    BaselineConfig,
    gaussian_dither,
    gaussian_noise_field,
    lpf_gaussian_dither,
    lpf_gaussian_noise_field,
)


def _lag1_autocorr(field):
    a = field[:, :-1].ravel()
    b = field[:, 1:].ravel()
    a = a - a.mean()
    b = b - b.mean()
    return float(np.sum(a * b) / np.sqrt(np.sum(a * a) * np.sum(b * b)))


class TestGaussianDither:
    def test_sigma_zero_identity(self):
        plane = np.full((8, 8), 512, dtype=np.uint16)
        out = gaussian_dither(plane, BaselineConfig(sigma=0.0, seed=1))
        assert np.array_equal(out, plane)

    def test_zero_mean_statistics(self):
        plane = np.full((1000, 1000), 512, dtype=np.uint16)
        out = gaussian_dither(plane, BaselineConfig(sigma=1.0, seed=3))
        delta = out.astype(np.float64) - 512.0
        assert abs(delta.mean()) < 0.01

    def test_output_std_tracks_sigma_midrange(self):
        # sigma 4: codeword rounding inflates the std by only ~0.3%,
        # keeping the 2% check meaningful.
        plane = np.full((1000, 1000), 512, dtype=np.uint16)
        out = gaussian_dither(plane, BaselineConfig(sigma=4.0, seed=5))
        assert out.astype(np.float64).std() == pytest.approx(4.0, rel=0.02)

    def test_deterministic_per_seed(self):
        plane = np.full((32, 32), 512, dtype=np.uint16)
        cfg = BaselineConfig(sigma=2.0, seed=9)
        assert np.array_equal(gaussian_dither(plane, cfg), gaussian_dither(plane, cfg))
        other = gaussian_dither(plane, BaselineConfig(sigma=2.0, seed=10))
        assert not np.array_equal(gaussian_dither(plane, cfg), other)


class TestLpfGaussianDither:
    def test_sigma_zero_identity(self):
        plane = np.full((8, 8), 512, dtype=np.uint16)
        out = lpf_gaussian_dither(plane, BaselineConfig(sigma=0.0, kernel_radius=2, seed=1))
        assert np.array_equal(out, plane)

    def test_rescaled_field_std_is_exact(self):
        field = lpf_gaussian_noise_field((500, 500), 3.0, 4, seed=2)
        assert float(field.std()) == pytest.approx(3.0, rel=0.02)

    def test_wider_kernel_raises_autocorrelation(self):
        narrow = lpf_gaussian_noise_field((400, 400), 2.0, 1, seed=7)
        wide = lpf_gaussian_noise_field((400, 400), 2.0, 4, seed=7)
        assert _lag1_autocorr(wide) > _lag1_autocorr(narrow)

    def test_unfiltered_field_is_nearly_white(self):
        raw = gaussian_noise_field((400, 400), 2.0, seed=7)
        assert abs(_lag1_autocorr(raw)) < 0.02


class TestConfigValidation:
    def test_negative_sigma(self):
        with pytest.raises(ValueError):
            BaselineConfig(sigma=-1.0)

    def test_kernel_radius(self):
        with pytest.raises(ValueError):
            BaselineConfig(sigma=1.0, kernel_radius=0)
