"""Tests for seeded streams and the samplers."""

import numpy as np
import pytest
import scipy.stats

from linalg.dense import numerical_rank
from linalg.errors import DimensionError, InvalidParameter
from models.features import build_isotropic_features, build_sigma_haar_spectrum
from models.noise import build_ar1, build_clustered, build_isotropic
from sampler.draws import (
    draw_dataset,
    gaussian_design,
    haar_orthogonal,
    make_dataset,
    sample_beta,
    sample_beta_weighted,
    sample_noise,
)
from sampler.streams import RandomStream


# =========================================================================
#                          TestRandomStream
# =========================================================================

class TestRandomStream:
    def test_same_identity_same_draws(self):
        a = RandomStream(5, 2).substream(3, 1).gen.standard_normal(10)
        b = RandomStream(5, 2).substream(3, 1).gen.standard_normal(10)
        np.testing.assert_array_equal(a, b)

    def test_substreams_differ(self):
        root = RandomStream(5)
        a = root.substream(0).gen.standard_normal(10)
        b = root.substream(1).gen.standard_normal(10)
        c = root.with_stream_id(1).gen.standard_normal(10)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_substream_does_not_advance_parent(self):
        root = RandomStream(8)
        first = RandomStream(8).gen.standard_normal(3)
        root.substream(4).gen.standard_normal(100)
        np.testing.assert_array_equal(root.gen.standard_normal(3), first)

    def test_seed_masked_to_64_bits(self):
        s = RandomStream(-1)
        assert s.seed == 2**64 - 1
        assert s.identity() == (2**64 - 1, 0, ())


# =========================================================================
#                          TestHaarOrthogonal
# =========================================================================

class TestHaarOrthogonal:
    def test_orthogonal(self, stream):
        for n in (1, 2, 5, 12):
            o = haar_orthogonal(n, stream)
            np.testing.assert_allclose(o.T @ o, np.eye(n), atol=1e-10)
            assert abs(abs(np.linalg.det(o)) - 1.0) < 1e-10

    def test_scalar_signs_balanced(self, stream):
        draws = np.array([haar_orthogonal(1, stream)[0, 0] for _ in range(10_000)])
        assert set(np.unique(draws)) == {-1.0, 1.0}
        counts = [np.count_nonzero(draws > 0), np.count_nonzero(draws < 0)]
        assert scipy.stats.chisquare(counts).pvalue > 1e-4

    def test_first_column_centered(self, stream):
        cols = np.array([haar_orthogonal(3, stream)[:, 0] for _ in range(10_000)])
        np.testing.assert_allclose(np.linalg.norm(cols, axis=1), 1.0, atol=1e-12)
        assert np.abs(cols.mean(axis=0)).max() < 3 / np.sqrt(10_000)

    def test_plain_qr_is_biased(self, stream):
        cols = np.array([haar_orthogonal(3, stream, sign_fix=False)[:, 0] for _ in range(2_000)])
        assert np.abs(cols.mean(axis=0)).max() > 0.3

    def test_invalid_size(self, stream):
        with pytest.raises(InvalidParameter):
            haar_orthogonal(0, stream)


# =========================================================================
#                          TestGaussianDesign
# =========================================================================

class TestGaussianDesign:
    def test_sample_covariance(self, stream):
        x = gaussian_design(10_000, build_isotropic_features(2), stream)
        np.testing.assert_allclose(x.T @ x / 10_000, np.eye(2), atol=5e-2)

    def test_anisotropic_covariance(self, stream, haar_features_20):
        x = gaussian_design(20_000, haar_features_20, stream)
        emp = x.T @ x / 20_000
        assert np.abs(emp - haar_features_20.sigma).max() < 0.15

    def test_full_row_rank(self, stream, haar_features_20):
        for i in range(20):
            x = gaussian_design(10, haar_features_20, stream.substream(i))
            assert numerical_rank(x) == 10

    def test_deterministic(self, haar_features_20):
        a = gaussian_design(5, haar_features_20, RandomStream(1, 2))
        b = gaussian_design(5, haar_features_20, RandomStream(1, 2))
        np.testing.assert_array_equal(a, b)

    def test_left_rotation_invariance(self):
        """O0 X has the same law as X: compare a scalar statistic across seeds."""
        features = build_sigma_haar_spectrum(6, RandomStream(3), scale=6.0)
        o0 = haar_orthogonal(4, RandomStream(4))
        plain = [gaussian_design(4, features, RandomStream(10, 0, (i,)))[0, 0] for i in range(1000)]
        rotated = [(o0 @ gaussian_design(4, features, RandomStream(10, 1, (i,))))[0, 0] for i in range(1000)]
        assert scipy.stats.ks_2samp(plain, rotated).pvalue > 1e-4


# =========================================================================
#                          TestSampleNoise
# =========================================================================

class TestSampleNoise:
    def test_isotropic_uncorrelated(self, stream):
        eps = sample_noise(build_isotropic(3, 1.0), stream, size=10_000)
        corr = np.corrcoef(eps.T)
        assert np.abs(corr - np.eye(3)).max() < 0.05

    def test_ar1_lag_one(self, stream):
        n_draws = 100_000
        eps = sample_noise(build_ar1(2, 1.0, 0.5), stream, size=n_draws)
        prod = eps[:, 0] * eps[:, 1]
        se = prod.std(ddof=1) / np.sqrt(n_draws)
        assert abs(prod.mean() - 2 / 3) < 4 * se

    def test_clustered_cross_block(self, stream):
        n_draws = 100_000
        eps = sample_noise(build_clustered([(2, 1.0, 0.5), (2, 2.0, 0.3)]), stream, size=n_draws)
        prod = eps[:, 0] * eps[:, 3]
        se = prod.std(ddof=1) / np.sqrt(n_draws)
        assert abs(prod.mean()) < 4 * se

    def test_covariance_converges(self, stream):
        omega = build_ar1(4, 1.0, 0.6)
        eps = sample_noise(omega, stream, size=200_000)
        assert np.abs(np.cov(eps.T) - omega.omega).max() < 0.05

    def test_single_draw_shape(self, stream):
        assert sample_noise(build_ar1(5, 1.0, 0.1), stream).shape == (5,)


# =========================================================================
#                          TestSampleBeta
# =========================================================================

class TestSampleBeta:
    def test_norm_concentrates(self, stream):
        beta = sample_beta(10_000, 1.0, stream)
        assert 0.94 <= float(beta @ beta) <= 1.06

    def test_second_moment(self, stream):
        p = 5
        betas = sample_beta(p, 2.0, stream, size=10_000)
        diag = (betas**2).mean(axis=0)
        se = (betas**2).std(axis=0, ddof=1) / np.sqrt(10_000)
        assert np.all(np.abs(diag - 2.0 / p) < 4 * se)

    def test_requires_positive_r2(self, stream):
        with pytest.raises(InvalidParameter):
            sample_beta(10, 0.0, stream)

    def test_weighted_second_moment(self, stream, haar_features_20):
        betas = sample_beta_weighted(haar_features_20, 1.0, stream, size=20_000)
        w = betas @ haar_features_20.sqrt
        np.testing.assert_allclose(w.T @ w / 20_000, np.eye(20) / 20, atol=0.01)


# =========================================================================
#                          TestDataset
# =========================================================================

class TestDataset:
    def test_response(self, stream, haar_features_20, iso_noise_10):
        d = draw_dataset(10, haar_features_20, iso_noise_10, 1.0, stream)
        np.testing.assert_array_equal(d.y, d.x @ d.beta + d.eps)
        assert (d.n, d.p) == (10, 20)
        assert d.overparameterized

    def test_shape_checks(self):
        with pytest.raises(DimensionError):
            make_dataset(np.ones((2, 3)), np.ones(2), np.ones(2))

    def test_noise_size_mismatch(self, stream, haar_features_20):
        with pytest.raises(DimensionError):
            draw_dataset(10, haar_features_20, build_isotropic(9, 1.0), 1.0, stream)
