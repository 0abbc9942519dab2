import math

import numpy as np
import pytest

from bcjrlab.errors import InvalidParameterError
from bcjrlab.gmm import GmmModel, fit_gmm, gmm_density, kmeans_1d
from bcjrlab.likelihood import gaussian_likelihood


class TestFit:
    def test_single_component_closed_form(self, rng):
        x = rng.normal(0.7, 1.3, size=5000)
        m = fit_gmm(x, 1)
        assert m.weights[0] == pytest.approx(1.0, abs=1e-9)
        assert m.means[0] == pytest.approx(x.mean(), abs=1e-9)
        assert m.variances[0] == pytest.approx(x.var(), abs=1e-9)

    def test_two_clusters(self, rng):
        x = np.concatenate([rng.normal(-5, 0.1, 2000), rng.normal(5, 0.1, 2000)])
        m = fit_gmm(x, 2)
        order = np.argsort(m.means)
        np.testing.assert_allclose(m.means[order], [-5, 5], atol=0.05)
        np.testing.assert_allclose(m.weights, 0.5, atol=0.05)

    def test_weights_on_simplex(self, rng):
        m = fit_gmm(rng.normal(size=800), 6)
        assert abs(m.weights.sum() - 1) < 1e-9
        assert np.all(m.variances >= m.variance_floor)

    @pytest.mark.parametrize("seed", range(20))
    def test_log_likelihood_non_decreasing(self, seed):
        r = np.random.default_rng(seed)
        k = int(r.integers(1, 7))
        centers = r.normal(0, 2, size=k)
        x = r.normal(centers[r.integers(k, size=600)], r.uniform(0.1, 1.0))
        trace = fit_gmm(x, int(r.integers(1, 9)), seed=seed).log_likelihood_trace
        assert len(trace) >= 2
        assert np.all(np.diff(trace) >= -1e-10)

    def test_stops_within_budget(self, rng):
        m = fit_gmm(rng.normal(size=300), 3, max_iter=5)
        assert len(m.log_likelihood_trace) <= 6

    def test_variance_floor_on_duplicates(self):
        x = np.concatenate([np.zeros(50), np.ones(50)])
        m = fit_gmm(x, 2)
        np.testing.assert_allclose(m.variances, 1e-6)

    def test_too_few_samples(self):
        with pytest.raises(InvalidParameterError):
            fit_gmm([1.0, 2.0], 3)

    def test_deterministic(self, rng):
        x = rng.normal(size=500)
        a, b = fit_gmm(x, 4, seed=1), fit_gmm(x, 4, seed=1)
        np.testing.assert_array_equal(a.means, b.means)

    def test_kmeans_separates(self, rng):
        x = np.concatenate([rng.normal(-3, 0.1, 100), rng.normal(3, 0.1, 100)])
        centers, labels = kmeans_1d(x, 2, np.random.default_rng(0))
        np.testing.assert_allclose(np.sort(centers), [-3, 3], atol=0.1)


class TestDensity:
    def test_single_peak(self):
        m = GmmModel([1.0], [0.4], [0.25])
        assert gmm_density(m, 0.4) == pytest.approx(1 / math.sqrt(2 * math.pi * 0.25), rel=1e-14)

    def test_integrates_to_one(self):
        m = GmmModel([0.2, 0.5, 0.3], [-2.0, 0.0, 3.0], [0.3, 1.0, 0.05])
        sd = math.sqrt(m.variances.max())
        grid = np.linspace(m.means.min() - 10 * sd, m.means.max() + 10 * sd, 200_001)
        assert np.trapezoid(gmm_density(m, grid), grid) == pytest.approx(1.0, abs=1e-4)

    def test_weighted_sum_of_components(self, rng):
        m = GmmModel([0.6, 0.4], [-1.0, 1.0], [0.5, 0.2])
        for y in rng.normal(size=50):
            expected = sum(w * gaussian_likelihood(y, mu, v) for w, mu, v in zip(m.weights, m.means, m.variances))
            assert gmm_density(m, y) == pytest.approx(expected, abs=1e-12)

    def test_vectorised_shape(self):
        m = GmmModel([1.0], [0.0], [1.0])
        assert gmm_density(m, np.zeros((3, 2))).shape == (3, 2)
        assert isinstance(gmm_density(m, 0.0), float)

    def test_invalid_model(self):
        with pytest.raises(InvalidParameterError):
            GmmModel([0.5, 0.6], [0, 1], [1, 1])
        with pytest.raises(InvalidParameterError):
            GmmModel([1.0], [0.0], [1e-9])
