import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qaup import sampling as sm
from qaup.errors import SizeLimitError
from qaup.finite_fourier import IndexSet


def direct_prob(B, k, q):
    """|sum_c exp(2 pi i c k / q)|^2 / (q |B|) with explicit Python complex arithmetic."""
    total = sum(complex(math.cos(2 * math.pi * c * k / q), math.sin(2 * math.pi * c * k / q)) for c in B)
    return abs(total) ** 2 / (q * len(B))


def easy_instance(r, t, a=0):
    p = r * t
    return sm.SamplingInstance(p, p, IndexSet(p, tuple(range(a, p, r))))


class TestPreimages:
    def test_powers_of_two_mod_15(self):
        assert sm.preimage_set(lambda c: pow(2, c, 15), 16, 1).members == (0, 4, 8, 12)

    def test_identity_and_parity(self):
        assert sm.preimage_set(lambda c: c, 8, 3).members == (3,)
        assert sm.preimage_set([c % 2 for c in range(8)], 8, 0).members == (0, 2, 4, 6)
        assert sm.preimage_set({c: c % 3 for c in range(9)}, 9, 2, q=16).q == 16

    def test_empty_preimage(self):
        with pytest.raises(ValueError):
            sm.preimage_set(lambda c: 0, 4, 1)


class TestInstances:
    def test_validation(self):
        with pytest.raises(ValueError):
            sm.SamplingInstance(8, 4, IndexSet(4, (0,)))
        with pytest.raises(ValueError):
            sm.SamplingInstance(4, 8, IndexSet(8, ()))
        with pytest.raises(ValueError):
            sm.SamplingInstance(4, 8, IndexSet(8, (5,)))

    def test_multi_validation(self):
        with pytest.raises(ValueError):
            sm.MultiDimInstance(((4, 8),), ((4,),))
        with pytest.raises(ValueError):
            sm.MultiDimInstance(((4, 8), (4, 8)), ((1,),))
        inst = sm.MultiDimInstance(((4, 8), (3, 16)), ((0, 1), (2, 2)))
        assert (inst.p_bar, inst.q_bar, inst.shape) == (12, 128, (8, 16))


class TestPointProbabilities:
    def test_zero_outcome(self):
        inst = sm.SamplingInstance(10, 64, IndexSet(64, (0, 3, 9)))
        assert sm.prob_point(inst, 0) == pytest.approx(3 / 64)

    def test_easy_factoring_points(self):
        r, t = 4, 8
        inst = easy_instance(r, t, a=3)
        for k in range(r * t):
            expected = 1 / r if k % t == 0 else 0.0
            assert sm.prob_point(inst, k) == pytest.approx(expected, abs=1e-12)

    def test_padded_factoring_point(self):
        # frozen from the closed form |sin(6 pi/64) / sin(pi/64)|^2 / (128 * 6)
        inst = sm.SamplingInstance(18, 128, IndexSet(128, (1, 4, 7, 10, 13, 16)))
        closed = (math.sin(6 * math.pi / 64) / math.sin(math.pi / 64)) ** 2 / (128 * 6)
        assert sm.prob_point(inst, 42) == pytest.approx(closed, rel=1e-12)
        assert sm.prob_point(inst, 42) == pytest.approx(0.0456, abs=1e-3)

    @settings(max_examples=60)
    @given(st.integers(2, 40).flatmap(lambda q: st.tuples(st.just(q), st.sets(st.integers(0, q - 1), min_size=1), st.integers(0, q - 1))))
    def test_matches_direct_sum(self, data):
        q, B, k = data
        inst = sm.SamplingInstance(q, q, IndexSet(q, tuple(B)))
        assert sm.prob_point(inst, k) == pytest.approx(direct_prob(B, k, q), abs=1e-12)

    @settings(max_examples=60)
    @given(st.integers(2, 20), st.integers(0, 2**32 - 1))
    def test_shift_covariance(self, p, seed):
        rng = np.random.default_rng(seed)
        q = p * int(rng.integers(1, 5)) + int(rng.integers(0, 4))
        bar_b = sorted(set(int(v) for v in rng.integers(0, p // 2 + 1, size=4)))
        a = int(rng.integers(0, p - max(bar_b)))
        base = sm.SamplingInstance(p, q, IndexSet(q, tuple(bar_b)))
        shifted = sm.SamplingInstance(p, q, IndexSet(q, tuple(a + c for c in bar_b)))
        ks = np.arange(q)
        np.testing.assert_allclose(sm.prob_points(base, ks), sm.prob_points(shifted, ks), atol=1e-12)

    def test_large_outcomes_do_not_lose_phase(self):
        q = 2**20
        inst = sm.SamplingInstance(q, q, IndexSet(q, (0, q - 1)))
        k = q - 1
        # phases 1 and exp(2 pi i (q-1)^2 / q) = exp(2 pi i / q)
        expected = abs(1 + np.exp(2j * np.pi / q)) ** 2 / (2 * q)
        assert sm.prob_point(inst, k) == pytest.approx(expected, rel=1e-12)


class TestSets:
    def test_normalization(self):
        inst = sm.SamplingInstance(20, 64, IndexSet(64, (2, 5, 11, 19)))
        assert sm.prob_set(inst, range(64)) == pytest.approx(1.0, abs=1e-9)

    def test_easy_factoring_target(self):
        inst = easy_instance(4, 8)
        assert sm.prob_set(inst, IndexSet(32, (8, 24))) == pytest.approx(0.5, abs=1e-12)
        assert sm.prob_via_operators(inst, IndexSet(32, (8, 24))) == pytest.approx(0.5, abs=1e-12)

    def test_empty_target(self):
        inst = easy_instance(3, 3)
        assert sm.prob_set(inst, ()) == 0.0
        assert sm.prob_via_operators(inst, ()) == 0.0

    def test_operator_path_limit(self):
        q = sm.MAX_OPERATOR_Q * 2
        with pytest.raises(SizeLimitError):
            sm.prob_via_operators(sm.SamplingInstance(4, q, IndexSet(q, (0,))), (0,))

    def test_operator_equivalence_random(self):
        rng = np.random.default_rng(11)
        for _ in range(60):
            q = int(rng.integers(2, 257))
            p = int(rng.integers(1, q + 1))
            B = tuple(rng.choice(p, int(rng.integers(1, min(p, 12) + 1)), replace=False))
            T = tuple(rng.choice(q, int(rng.integers(0, q + 1)), replace=False))
            inst = sm.SamplingInstance(p, q, IndexSet(q, B))
            assert sm.prob_via_operators(inst, T) == pytest.approx(sm.prob_set(inst, T), abs=1e-10)

    def test_operator_equivalence_exhaustive_small(self):
        rng = np.random.default_rng(12)
        for p in (4, 5):
            for q in (p, 8):
                for n in range(1, p + 1):
                    for B in itertools.combinations(range(p), n):
                        inst = sm.SamplingInstance(p, q, IndexSet(q, B))
                        T = tuple(rng.choice(q, int(rng.integers(0, q + 1)), replace=False))
                        assert sm.prob_via_operators(inst, T) == pytest.approx(sm.prob_set(inst, T), abs=1e-10)


class TestFutility:
    def test_value(self):
        assert sm.v3_futility(16, 4) == pytest.approx(-0.178, abs=1e-3)

    def test_negative_below_full_band(self):
        for q in (4, 16, 64, 1000):
            for b in range(1, q):
                assert sm.v3_futility(q, b) < 0
        assert sm.v3_futility(16, 16) == pytest.approx(0.0)

    def test_invalid(self):
        with pytest.raises(ValueError):
            sm.v3_futility(8, 0)


class TestMulti:
    def test_one_register_matches_one_dimension(self):
        for p, q in ((5, 5), (5, 11), (6, 16)):
            for n in range(1, p + 1):
                for B in itertools.combinations(range(p), n):
                    one = sm.full_distribution(sm.SamplingInstance(p, q, IndexSet(q, B))).as_dense()
                    multi = sm.full_distribution(sm.MultiDimInstance(((p, q),), tuple((b,) for b in B)))
                    np.testing.assert_allclose(multi.as_dense(), one, atol=1e-12)
                    assert sm.prob_point_multi(sm.MultiDimInstance(((p, q),), tuple((b,) for b in B)), (3,)) == pytest.approx(one[3], abs=1e-12)

    def test_dlog_lines(self):
        # g = 2 mod 11, x = 8 = 2^3: B = {(k + 3b mod 10, b)}
        r, n, k = 3, 10, 4
        B = tuple(((k + r * b) % n, b) for b in range(n))
        inst = sm.MultiDimInstance(((n, n), (n, n)), B)
        for c in range(n):
            for d in range(n):
                expected = 1 / n if (d + r * c) % n == 0 else 0.0
                assert sm.prob_point_multi(inst, (c, d)) == pytest.approx(expected, abs=1e-12)
        assert sm.full_distribution(inst).total() == pytest.approx(1.0, abs=1e-9)

    def test_three_registers_use_fft(self):
        rng = np.random.default_rng(4)
        B = tuple(tuple(int(v) for v in rng.integers(0, 3, size=3)) for _ in range(5))
        inst = sm.MultiDimInstance(((3, 4), (3, 5), (3, 4)), B)
        dist = sm.full_distribution(inst)
        assert dist.total() == pytest.approx(1.0, abs=1e-9)
        for k in [(0, 0, 0), (1, 2, 3), (3, 4, 1)]:
            assert dist.prob(k) == pytest.approx(sm.prob_point_multi(inst, k), abs=1e-12)

    def test_dimension_mismatch(self):
        inst = sm.MultiDimInstance(((4, 8), (4, 8)), ((0, 0),))
        with pytest.raises(ValueError):
            sm.prob_point_multi(inst, (0,))
        with pytest.raises(ValueError):
            sm.prob_point_multi(inst, (8, 0))


class TestDistributions:
    def test_easy_factoring_support(self):
        dist = sm.full_distribution(easy_instance(4, 8))
        assert dist.support() == [0, 8, 16, 24]
        assert all(dist[k] == pytest.approx(0.25) for k in (0, 8, 16, 24))

    def test_fft_path_matches_direct(self):
        q = 4096
        B = IndexSet(q, tuple(range(0, 4096, 3)))
        inst = sm.SamplingInstance(q, q, B)
        assert q * len(B) > sm.DIRECT_TERMS_LIMIT
        dist = sm.full_distribution(inst)
        ks = np.array([0, 1, 1365, 1366, 2731, 4095])
        np.testing.assert_allclose(dist.as_dense()[ks], sm.prob_points(inst, ks), atol=1e-10)
        assert dist.total() == pytest.approx(1.0, abs=1e-9)

    def test_size_limit(self):
        q = sm.MAX_DISTRIBUTION_SIZE * 2
        with pytest.raises(SizeLimitError):
            sm.full_distribution(sm.SamplingInstance(4, q, IndexSet(q, (0,))))

    def test_sparse_and_dense_agree(self):
        dense = sm.Distribution((4,), dense=np.array([0.5, 0.0, 0.25, 0.25]))
        sparse = sm.Distribution((4,), sparse={0: 0.5, 2: 0.25, 3: 0.25})
        assert dense.support() == sparse.support() == [0, 2, 3]
        assert dense.mass([2, 3]) == sparse.mass([2, 3]) == 0.5
        np.testing.assert_allclose(sparse.as_dense(), dense.as_dense())
        assert sm.sample_many(dense, 50, 3) == sm.sample_many(sparse, 50, 3)
        with pytest.raises(ValueError):
            sm.Distribution((4,))

    def test_sampling_deterministic(self):
        dist = sm.full_distribution(sm.SamplingInstance(18, 128, IndexSet(128, (1, 4, 7, 10, 13, 16))))
        assert sm.sample(dist, 99) == sm.sample(dist, 99)
        assert sm.sample_many(dist, 20, 5) == sm.sample_many(dist, 20, 5)

    def test_sampling_statistics(self):
        inst = sm.SamplingInstance(18, 64, IndexSet(64, (1, 4, 7, 10, 13, 16)))
        dist = sm.full_distribution(inst)
        n = 100_000
        draws = np.array(sm.sample_many(dist, n, 2024))
        counts = np.bincount(draws, minlength=64)
        probs = dist.as_dense()
        sigma = np.sqrt(n * probs * (1 - probs))
        # multinomial 3-sigma band per cell (plus one count of slack for empty cells)
        assert np.all(np.abs(counts - n * probs) <= 3 * sigma + 1)
        assert counts[probs < 1e-15].sum() == 0

    def test_multi_sampling_returns_tuples(self):
        inst = sm.MultiDimInstance(((4, 8), (4, 8)), ((0, 0), (1, 2)))
        out = sm.sample(sm.full_distribution(inst), 1)
        assert isinstance(out, tuple) and len(out) == 2
