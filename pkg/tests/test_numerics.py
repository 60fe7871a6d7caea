import math

import numpy as np
import pytest

from plsinet.errors import DomainError, FactorizationError, ShapeError
from plsinet.numerics import (
    cholesky,
    derive_seed,
    mvn_sample,
    standard_normal_quantile,
    substream,
)


class TestCholesky:
    def test_identity(self):
        L = cholesky(np.eye(3))
        assert np.array_equal(L, np.eye(3))

    def test_multiply_back(self):
        cov = np.array([[1.0, 0.3], [0.3, 1.0]])
        L = cholesky(cov)
        assert np.allclose(L @ L.T, cov, atol=1e-12)
        assert np.allclose(np.triu(L, 1), 0.0)

    def test_indefinite_names_pivot(self):
        with pytest.raises(FactorizationError, match="pivot 1"):
            cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_asymmetric_rejected(self):
        with pytest.raises(DomainError):
            cholesky(np.array([[1.0, 0.5], [0.1, 1.0]]))

    def test_random_spd_roundtrip(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            a = rng.standard_normal((8, 8))
            cov = a @ a.T + 8 * np.eye(8)
            L = cholesky(cov)
            err = np.abs(L @ L.T - cov).max() / np.abs(cov).max()
            assert err < 1e-9


class TestMvnSample:
    def test_zero_factor_returns_mean(self):
        mean = np.array([1.0, -2.0, 3.0])
        out = mvn_sample(substream(0), mean, np.zeros((3, 3)), 5)
        assert out.shape == (5, 3)
        assert np.array_equal(out, np.tile(mean, (5, 1)))

    def test_equicorrelation_sample_correlation(self):
        rho = 0.3
        cov = (1 - rho) * np.eye(8) + rho * np.ones((8, 8))
        L = cholesky(cov)
        draws = mvn_sample(substream(42), np.zeros(8), L, 100_000)
        corr = np.corrcoef(draws.T)
        off = corr[~np.eye(8, dtype=bool)]
        assert np.all(np.abs(off - rho) < 0.01)

    def test_deterministic(self):
        L = cholesky(np.array([[2.0, 0.4], [0.4, 1.0]]))
        a = mvn_sample(substream(5), np.zeros(2), L, 10)
        b = mvn_sample(substream(5), np.zeros(2), L, 10)
        assert np.array_equal(a, b)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            mvn_sample(substream(0), np.zeros(3), np.eye(2), 4)


class TestNormalQuantile:
    def test_median(self):
        assert standard_normal_quantile(0.5) == 0.0

    def test_reference_value(self):
        assert abs(standard_normal_quantile(0.975) - 1.959964) < 1e-6

    def test_antisymmetry(self):
        assert abs(standard_normal_quantile(0.025) + standard_normal_quantile(0.975)) < 1e-12

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.2, 1.3])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            standard_normal_quantile(p)

    def test_roundtrip_through_cdf(self):
        # Phi via the stdlib erf, independent of the implementation under test
        for x in np.linspace(-5.0, 5.0, 41):
            phi = 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))
            assert abs(standard_normal_quantile(phi) - x) < 1e-6


class TestSubstreams:
    def test_distinct_stream_ids_disagree(self):
        for seed in (0, 1, 42):
            a = substream(seed, 0).random(10_000)
            b = substream(seed, 1).random(10_000)
            assert not np.array_equal(a, b)

    def test_same_path_replays(self):
        a = substream(9, 3, 1).standard_normal(100)
        b = substream(9, 3, 1).standard_normal(100)
        assert np.array_equal(a, b)

    def test_nested_paths_distinct(self):
        assert derive_seed(5, 0, 1) != derive_seed(5, 1, 0)
        assert derive_seed(5) != derive_seed(6)
