import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qaup import bounds as bd
from qaup.errors import PreconditionError
from qaup.sampling import SamplingInstance, prob_point
from qaup.finite_fourier import IndexSet


def factoring_input(r, t, s, j=1, a=0):
    p = r * t
    q = int(s * p)
    k = j * t
    return bd.QaupV1Input(p, q, k, (q * k) // p, tuple(range(0, p, r)), delta=Fraction(r * t * t, 2), a=a)


class TestPhaseLemma:
    def test_examples(self):
        assert bd.phase_lemma_check(0.0)
        assert abs(np.exp(1j * math.pi) - 1) == pytest.approx(2.0)
        assert bd.phase_lemma_check(math.pi)

    def test_sweep(self):
        xs = np.random.default_rng(0).uniform(-10, 10, 10_000)
        assert all(bd.phase_lemma_check(float(x)) for x in xs)


class TestVersionOne:
    def test_factoring_condition_sides(self):
        inp = factoring_input(4, 8, 8)
        lhs = 2 * math.pi * float(inp.delta) / inp.q**2
        assert lhs == pytest.approx(math.pi / 256)
        assert inp.p / inp.q * inp.small_norm() == pytest.approx(1 / 32)
        assert bd.qaup_v1_condition(inp)

    def test_factoring_bound_value(self):
        rep = bd.qaup_v1_bound(factoring_input(4, 8, 8))
        assert rep.lower_bound == pytest.approx((1 / 32) * (1 - math.pi / 8) ** 2, rel=1e-12)
        assert rep.lower_bound == pytest.approx(0.011523, abs=1e-5)
        assert rep.exact_probability == pytest.approx(1 / 32, abs=1e-12)
        assert rep.inequality_holds

    def test_non_integral_ratio(self):
        inp = bd.QaupV1Input(18, 128, 6, 42, tuple(range(0, 18, 3)), delta=54)
        assert inp.epsilon == Fraction(-2, 3)
        rep = bd.qaup_v1_bound(inp)
        assert rep.lower_bound == pytest.approx(0.0146, abs=1e-4)
        assert rep.exact_probability == pytest.approx(0.0456, abs=1e-4)
        assert rep.inequality_holds and rep.margin > 0

    def test_exact_probability_is_sampling_probability(self):
        inp = bd.QaupV1Input(18, 128, 6, 42, tuple(range(1, 18, 3)), delta=54, a=1)
        inst = SamplingInstance(18, 128, IndexSet(128, tuple(range(1, 18, 3))))
        assert bd.qaup_v1_bound(inp).exact_probability == pytest.approx(prob_point(inst, 42), abs=1e-14)

    def test_zero_epsilon_is_tight(self):
        # q/p integral and k' = qk/p: bound and exact value coincide
        inp = bd.QaupV1Input(6, 24, 2, 8, (0, 1, 4), delta=0)
        rep = bd.qaup_v1_bound(inp)
        small = SamplingInstance(6, 6, IndexSet(6, (0, 1, 4)))
        assert rep.lower_bound == pytest.approx(6 / 24 * prob_point(small, 2), abs=1e-14)
        assert rep.lower_bound == pytest.approx(rep.exact_probability, abs=1e-14)

    def test_vanishing_small_norm_is_vacuous(self):
        # the phases of k = 1 on {0, 4, 8} mod 12 are the cube roots of unity
        inp = bd.QaupV1Input(12, 24, 1, 2, (0, 4, 8), delta=0)
        assert inp.small_norm() == pytest.approx(0, abs=1e-12)
        rep = bd.qaup_v1_evaluate(inp)
        assert rep.lower_bound == pytest.approx(0, abs=1e-20)

    def test_delta_below_floor(self):
        with pytest.raises(ValueError):
            bd.QaupV1Input(18, 128, 6, 42, tuple(range(0, 18, 3)), delta=29)

    def test_condition_failure(self):
        inp = bd.QaupV1Input(4, 5, 1, 1, (0, 1, 2, 3), delta=100)
        with pytest.raises(PreconditionError):
            bd.qaup_v1_bound(inp)
        rep = bd.qaup_v1_evaluate(inp)
        assert not rep.condition_holds and not rep.inequality_holds
        assert math.isnan(rep.lower_bound)

    def test_invalid_ranges(self):
        with pytest.raises(ValueError):
            bd.QaupV1Input(8, 8, 0, 0, (0,), delta=0)
        with pytest.raises(ValueError):
            bd.QaupV1Input(4, 8, 4, 0, (0,), delta=0)
        with pytest.raises(ValueError):
            bd.QaupV1Input(4, 8, 0, 0, (), delta=0)

    def test_report_serializes(self):
        out = bd.qaup_v1_bound(factoring_input(3, 12, 16)).to_dict()
        assert set(out) >= {"lower_bound", "exact_probability", "condition_holds", "inequality_holds", "margin"}


class TestRounding:
    def test_kinds(self):
        assert bd.rounded_k_prime("floor", 1, 3, 10) == 3
        assert bd.rounded_k_prime("ceil", 1, 3, 10) == 4
        assert bd.rounded_k_prime("round", 1, 3, 10) == 3
        assert bd.rounded_k_prime("round", 1, 4, 10) == 3  # 2.5 rounds up
        with pytest.raises(ValueError):
            bd.rounded_k_prime("nearest", 1, 3, 10)

    def test_floor_with_integral_ratio(self):
        inp = bd.qaup_v1a_input("floor", 3, 8, 64, (0, 1, 5), 6)
        assert inp.epsilon == 0

    def test_all_kinds_factoring(self):
        bar_b = tuple(range(0, 18, 3))
        for kind in ("floor", "round", "ceil"):
            for j in (1, 2):
                rep = bd.qaup_v1a_bound(kind, 6 * j, 18, 128, bar_b, 54)
                assert rep.inequality_holds
                assert rep.parameters["kind"] == kind

    def test_delta_bar_must_cover(self):
        with pytest.raises(ValueError):
            bd.qaup_v1a_bound("floor", 1, 5, 16, (1, 4), 4)


def _inner_terms(inp):
    p, q, nb = inp.p, inp.q, inp.b_size
    return math.sqrt(p / nb) * inp.small_norm() - 2 * math.pi * float(inp.delta) / (q * math.sqrt(nb * p))


class TestLemmaChain:
    def test_exhaustive_tiny(self):
        for p in range(1, 5):
            for q in range(p + 1, 10):
                for n in range(1, p + 1):
                    for bar_b in itertools.combinations(range(p), n):
                        for k in range(p):
                            for kind in ("floor", "round", "ceil"):
                                try:
                                    inp = bd.qaup_v1a_input(kind, k, p, q, bar_b, sum(bar_b))
                                except ValueError:
                                    continue
                                if not bd.qaup_v1_condition(inp):
                                    continue
                                zero, lower, middle, top = bd.lemma_v1_chain(inp)
                                assert zero <= lower + 1e-10
                                assert lower <= middle + 1e-12
                                assert middle <= top + 1e-10
                                # the bracket is nonnegative before squaring
                                assert _inner_terms(inp) >= -1e-12

    @settings(max_examples=200)
    @given(st.integers(1, 30), st.integers(1, 40), st.integers(0, 2**32 - 1))
    def test_triangle_gap(self, p, extra, seed):
        rng = np.random.default_rng(seed)
        q = p + extra
        bar_b = sorted(set(int(v) for v in rng.integers(0, p, size=int(rng.integers(1, p + 1)))))
        k = int(rng.integers(0, p))
        k_prime = int(rng.integers(0, q))
        eps = Fraction(k_prime) - Fraction(q * k, p)
        c = np.asarray(bar_b)
        small = np.exp(2j * np.pi * (c * k % p) / p).sum() / q
        padded = np.exp(2j * np.pi * (c * k_prime % q) / q).sum() / q
        assert abs(small - padded) <= 2 * math.pi * abs(float(eps)) * c.sum() / q**2 + 1e-12


class TestVersionTwo:
    def test_one_register_collapse(self):
        rng = np.random.default_rng(7)
        checked = 0
        for _ in range(200):
            p = int(rng.integers(2, 12))
            q = int(rng.integers(p + 1, 40))
            bar_b = tuple(sorted(set(int(v) for v in rng.integers(0, p, size=3))))
            k = int(rng.integers(0, p))
            k_prime = bd.rounded_k_prime("floor", k, p, q)
            v1 = bd.QaupV1Input(p, q, k, k_prime, bar_b, delta=sum(bar_b))
            v2 = bd.QaupV2Input(((p, q),), (k,), (k_prime,), tuple((c,) for c in bar_b), Fraction(sum(bar_b), q))
            assert v2.min_delta() == v1.min_delta() / q
            r1, r2 = bd.qaup_v1_evaluate(v1), bd.qaup_v2_evaluate(v2)
            assert r1.condition_holds == r2.condition_holds
            assert r2.exact_probability == pytest.approx(r1.exact_probability, abs=1e-12)
            if r1.condition_holds:
                checked += 1
                assert r2.lower_bound == pytest.approx(r1.lower_bound, abs=1e-12)
        assert checked > 20

    def test_two_register_chain(self):
        rng = np.random.default_rng(8)
        held = 0
        for _ in range(300):
            ns = rng.integers(2, 6, size=2)
            dims = tuple((int(n), int(n + rng.integers(1, 10))) for n in ns)
            B = {tuple(int(rng.integers(0, n)) for n, _ in dims) for _ in range(int(rng.integers(1, 6)))}
            k = tuple(int(rng.integers(0, n)) for n, _ in dims)
            kp = tuple(bd.rounded_k_prime("floor", kj, n, q) for kj, (n, q) in zip(k, dims))
            probe = bd.QaupV2Input(dims, k, kp, tuple(B), 10**9)
            inp = bd.QaupV2Input(dims, k, kp, tuple(B), probe.min_delta())
            if not bd.qaup_v2_condition(inp):
                continue
            held += 1
            zero, lower, top = bd.lemma_v2_chain(inp)
            assert zero <= lower + 1e-10 <= top + 2e-10
            assert bd.qaup_v2_bound(inp).inequality_holds
        assert held > 50

    def test_delta_floor(self):
        with pytest.raises(ValueError):
            bd.QaupV2Input(((10, 32), (10, 32)), (1, 2), (3, 6), ((0, 1), (5, 3)), 0)

    def test_condition_failure_raises(self):
        inp = bd.QaupV2Input(((4, 5), (4, 5)), (1, 1), (1, 1), ((0, 0), (1, 2), (3, 3)), 50)
        with pytest.raises(PreconditionError):
            bd.qaup_v2_bound(inp)
        assert not bd.qaup_v2_evaluate(inp).condition_holds

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            bd.QaupV2Input(((4, 8), (4, 8)), (1,), (2, 2), ((0, 0),), 1)


class TestAggregate:
    def test_sums(self):
        reps = [bd.qaup_v1_bound(factoring_input(4, 8, 8, j=j)) for j in (1, 3)]
        lower, exact = bd.aggregate(reps)
        assert lower == pytest.approx(2 * (1 / 32) * (1 - math.pi / 8) ** 2)
        assert exact == pytest.approx(2 / 32)
        assert lower <= exact
