import math

import numpy as np
import pytest

from bcjrlab import likelihood
from bcjrlab.channel import TapProfile, exp_decay_taps, normalize_taps
from bcjrlab.errors import ContractViolation, InvalidParameterError
from bcjrlab.likelihood import CsiLikelihoodProvider, build_table, gaussian_likelihood
from bcjrlab.trellis import Trellis, state_index

SIGMA2_5DB = 10 ** -0.5


class TestGaussianLikelihood:
    def test_peak(self):
        # 1 / sqrt(2 pi sigma^2) with sigma^2 = 10^-0.5
        assert gaussian_likelihood(0.3, 0.3, SIGMA2_5DB) == pytest.approx(0.7094308430318422, rel=1e-14)
        assert gaussian_likelihood(0.3, 0.3, 0.316228) == pytest.approx(0.709431, abs=1e-6)

    def test_symmetric(self):
        assert gaussian_likelihood(1.7, 1.0, 0.4) == pytest.approx(gaussian_likelihood(0.3, 1.0, 0.4), rel=1e-15)

    def test_unit_offset(self):
        assert gaussian_likelihood(1.0, 0.0, 0.5) == pytest.approx(math.exp(-1) / math.sqrt(math.pi), rel=1e-14)
        assert gaussian_likelihood(1.0, 0.0, 0.5) == pytest.approx(0.207554, abs=5e-7)

    def test_far_tail_flushes(self):
        assert gaussian_likelihood(1e4, 0.0, 1e-3) == 0.0

    @pytest.mark.parametrize("s2", [0.0, -1.0])
    def test_invalid_variance(self, s2):
        with pytest.raises(InvalidParameterError):
            gaussian_likelihood(0.0, 0.0, s2)


class TestBuildTable:
    def test_memoryless(self):
        p = CsiLikelihoodProvider(normalize_taps(TapProfile([1.0])), SIGMA2_5DB, Trellis(1))
        row = build_table([1.0], p).values[0]
        assert row[1] == pytest.approx(0.7094308430318422, rel=1e-14)
        assert row[1] > row[0]

    def test_true_state_dominates(self, rng):
        taps = normalize_taps(exp_decay_taps(1.0, 4))
        x = rng.choice((-1.0, 1.0), size=50)
        trellis = Trellis(4)
        means = trellis.state_means(taps.taps[0])
        truth = [state_index(x[t - 3:t + 1][::-1]) for t in range(3, 50)]
        p = CsiLikelihoodProvider(taps, 1e-4, trellis)
        table = build_table(means[truth], p).values
        assert np.all(np.argmax(table, axis=1) == truth)

    def test_rows_not_normalized(self):
        p = CsiLikelihoodProvider(normalize_taps(TapProfile([1.0])), 0.1, Trellis(1))
        assert build_table([0.0], p).values.sum() != pytest.approx(1.0)

    def test_argmax_nearest_mean(self, rng):
        taps = normalize_taps(exp_decay_taps(0.5, 3))
        trellis = Trellis(3)
        means = trellis.state_means(taps.taps[0])
        y = rng.normal(0, 1.5, size=300)
        table = build_table(y, CsiLikelihoodProvider(taps, 0.3, trellis)).values
        nearest = np.abs(y[:, None] - means[None, :]).min(axis=1)
        chosen = np.abs(y - means[np.argmax(table, axis=1)])
        np.testing.assert_allclose(chosen, nearest, atol=1e-12)

    def test_time_varying_rows_used_per_symbol(self):
        taps = normalize_taps(TapProfile([[1.0, 0.0], [0.0, 1.0]]))
        table = build_table([1.0, 1.0], CsiLikelihoodProvider(taps, 0.1, Trellis(2))).values
        # t=0 depends on newest symbol only, t=1 on the older one
        assert table[0, state_index([1, -1])] == pytest.approx(table[0, state_index([1, 1])])
        assert table[1, state_index([-1, 1])] == pytest.approx(table[1, state_index([1, 1])])

    def test_permutation_invariance(self, rng):
        p = CsiLikelihoodProvider(normalize_taps(exp_decay_taps(1.0, 2)), 0.3, Trellis(2))
        y = rng.normal(size=20)
        perm = rng.permutation(20)
        np.testing.assert_array_equal(build_table(y, p).values[perm], build_table(y[perm], p).values)

    def test_underflow_replaced(self):
        before = likelihood.diagnostics["underflow_rows"]
        p = CsiLikelihoodProvider(normalize_taps(TapProfile([1.0])), 1e-4, Trellis(1))
        table = build_table([1.0, 1e3], p).values
        np.testing.assert_array_equal(table[1], [1.0, 1.0])
        assert likelihood.diagnostics["underflow_rows"] == before + 1

    def test_inconsistent_provider(self):
        with pytest.raises(ContractViolation):
            CsiLikelihoodProvider(normalize_taps(TapProfile([1.0, 0.5])), 0.1, Trellis(3))
        with pytest.raises(InvalidParameterError):
            CsiLikelihoodProvider(normalize_taps(TapProfile([1.0])), 0.0, Trellis(1))
