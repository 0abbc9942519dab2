import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcjrlab import _bcjr_py
from bcjrlab.bcjr import BACKENDS, backward_pass, forward_pass, map_detect
from bcjrlab.channel import TapProfile, normalize_taps, transmit
from bcjrlab.errors import InvalidParameterError, NumericalError
from bcjrlab.likelihood import CsiLikelihoodProvider, LikelihoodTable, build_table
from bcjrlab.trellis import Trellis
from oracles import brute_force_posteriors, channel_posteriors, random_instance


def csi_table(taps, y, s2):
    return build_table(y, CsiLikelihoodProvider(normalize_taps(TapProfile(taps)), s2, Trellis(len(taps))))


def unrolled_forward(v):
    """Scalar forward recursion for memory 2, written out transition by transition."""
    T = len(v)
    prev = [0.25] * 4
    out = []
    for t in range(T):
        cur = [0.0] * 4
        for p in range(4):
            for bit in (0, 1):
                n = bit * 2 + (p >> 1)
                cur[n] += 0.5 * v[t][n] * prev[p]
        z = sum(cur)
        prev = [c / z for c in cur]
        out.append(prev)
    return np.array(out)


def unrolled_backward(v):
    T = len(v)
    nxt = [0.25] * 4
    out = [nxt]
    for t in range(T - 2, -1, -1):
        cur = [0.0] * 4
        for s in range(4):
            for bit in (0, 1):
                n = bit * 2 + (s >> 1)
                cur[s] += 0.5 * v[t + 1][n] * nxt[n]
        z = sum(cur)
        nxt = [c / z for c in cur]
        out.append(nxt)
    return np.array(out[::-1])


HAND_TABLE = np.array([[0.1, 0.7, 0.3, 0.2], [0.5, 0.05, 0.9, 0.4], [0.3, 0.3, 0.01, 0.8]])


class TestForward:
    def test_uniform(self, backend):
        a = forward_pass(np.ones((5, 2)), Trellis(1), backend=backend)
        np.testing.assert_allclose(a, 0.5, atol=1e-15)

    def test_single_step(self, backend):
        a = forward_pass(np.array([[0.2, 0.6]]), Trellis(1), backend=backend)
        np.testing.assert_allclose(a, [[0.25, 0.75]], atol=1e-15)

    def test_hand_unrolled(self, backend):
        np.testing.assert_allclose(forward_pass(HAND_TABLE, Trellis(2), backend=backend),
                                   unrolled_forward(HAND_TABLE), atol=1e-14)

    def test_rows_sum_to_one(self, backend, rng):
        a = forward_pass(rng.random((100, 8)), Trellis(3), backend=backend)
        np.testing.assert_allclose(a.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(a >= 0)

    def test_empty(self, backend):
        with pytest.raises(InvalidParameterError):
            forward_pass(np.zeros((0, 2)), Trellis(1), backend=backend)

    def test_width_mismatch(self, backend):
        with pytest.raises(InvalidParameterError):
            forward_pass(np.ones((3, 4)), Trellis(1), backend=backend)


class TestBackward:
    def test_uniform(self, backend):
        np.testing.assert_allclose(backward_pass(np.ones((5, 4)), Trellis(2), backend=backend), 0.25)

    def test_hand_unrolled(self, backend):
        np.testing.assert_allclose(backward_pass(HAND_TABLE, Trellis(2), backend=backend),
                                   unrolled_backward(HAND_TABLE), atol=1e-14)

    def test_time_reversal_memoryless(self, backend, rng):
        # a memoryless transition kernel carries no information backwards, so
        # beta is uniform and reversing the frame just reverses the posteriors
        v = rng.random((12, 2))
        b = backward_pass(v, Trellis(1), backend=backend)
        np.testing.assert_allclose(b, 0.5, atol=1e-15)
        _, fwd = map_detect(v, Trellis(1), backend=backend)
        _, rev = map_detect(v[::-1], Trellis(1), backend=backend)
        np.testing.assert_allclose(fwd.per_symbol, rev.per_symbol[::-1], atol=1e-15)
        np.testing.assert_allclose(forward_pass(v[::-1], Trellis(1), backend=backend)[::-1],
                                   fwd.per_symbol, atol=1e-15)


class TestMapDetect:
    def test_memoryless_is_sign_detector(self, backend, rng):
        taps, x, y, s2 = random_instance(rng, 2000, 1, sigma2=0.5)
        decisions, _ = map_detect(csi_table([1.0], y, s2), Trellis(1), backend=backend)
        np.testing.assert_array_equal(decisions, np.where(y > 0, 1.0, -1.0))

    def test_uniform_table_ties_to_minus_one(self, backend):
        decisions, post = map_detect(np.ones((4, 8)), Trellis(3), backend=backend)
        np.testing.assert_allclose(post.per_symbol, 0.5)
        np.testing.assert_array_equal(decisions, -1.0)

    def test_brute_force_T6_L2(self, backend, rng):
        taps, x, y, s2 = random_instance(rng, 6, 2)
        table = csi_table(taps, y, s2)
        _, post = map_detect(table, Trellis(2), backend=backend)
        np.testing.assert_allclose(post.per_symbol, brute_force_posteriors(table.values, 2), atol=1e-9)

    @pytest.mark.parametrize("seed", range(30))
    def test_oracle_equivalence(self, backend, seed):
        r = np.random.default_rng(seed)
        memory = int(r.integers(1, 4))
        T = int(r.integers(memory, 9))
        taps, x, y, s2 = random_instance(r, T, memory)
        table = csi_table(taps, y, s2)
        _, post = map_detect(table, Trellis(memory), backend=backend)
        np.testing.assert_allclose(post.per_symbol, brute_force_posteriors(table.values, memory),
                                   atol=1e-9, rtol=0)

    def test_matches_channel_law_when_memoryless(self, backend, rng):
        # with one tap the zero-padded channel law and the trellis agree exactly
        taps, x, y, s2 = random_instance(rng, 7, 1)
        _, post = map_detect(csi_table(taps, y, s2), Trellis(1), backend=backend)
        np.testing.assert_allclose(post.per_symbol, channel_posteriors(y, taps, s2), atol=1e-12)

    def test_posteriors_valid(self, backend, rng):
        _, post = map_detect(rng.random((200, 16)), Trellis(4), backend=backend)
        p = post.per_symbol
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)
        assert np.all((p >= 0) & (p <= 1))

    @given(st.integers(0, 2**31), st.floats(1e-6, 1e6))
    @settings(max_examples=40, deadline=None)
    def test_row_scale_invariance(self, seed, c):
        r = np.random.default_rng(seed)
        v = r.random((8, 4)) + 1e-3
        scaled = v.copy()
        scaled[r.integers(8)] *= c
        for b in BACKENDS:
            _, p1 = map_detect(v, Trellis(2), backend=b)
            _, p2 = map_detect(scaled, Trellis(2), backend=b)
            np.testing.assert_allclose(p1.per_symbol, p2.per_symbol, atol=1e-9)

    def test_negation_symmetry(self, backend, rng):
        taps = normalize_taps(TapProfile([1.0, 0.6, 0.3]))
        x = rng.choice((-1.0, 1.0), size=200)
        y = transmit(x, taps, 0.0, rng).outputs
        prov = CsiLikelihoodProvider(taps, 0.2, Trellis(3))
        d1, _ = map_detect(build_table(y, prov), Trellis(3), backend=backend)
        d2, _ = map_detect(build_table(-y, prov), Trellis(3), backend=backend)
        np.testing.assert_array_equal(d1, -d2)
        np.testing.assert_array_equal(d1, x)

    def test_messages_returned(self, backend, rng):
        v = rng.random((10, 4))
        _, _, msgs = map_detect(LikelihoodTable(v), Trellis(2), backend=backend, return_messages=True)
        np.testing.assert_allclose(msgs.forward, forward_pass(v, Trellis(2), backend=backend))
        np.testing.assert_allclose(msgs.backward, backward_pass(v, Trellis(2), backend=backend))

    def test_degenerate_table(self, backend):
        v = np.ones((3, 2))
        v[1] = 0.0
        with pytest.raises(NumericalError):
            map_detect(v, Trellis(1), backend=backend)


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernel not built")
def test_backends_agree(rng):
    v = rng.random((5000, 16)) ** 4
    for a, b in zip(BACKENDS["cython"].run(v), _bcjr_py.run(v)):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-300)
