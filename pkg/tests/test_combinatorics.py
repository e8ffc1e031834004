import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from listcomm.combinatorics import (
    HypergeomParams,
    Shape,
    hypergeom_log_term,
    hypergeom_tail_log,
    log_binomial,
    prop2_log_approx,
    ratio_profile,
    stirling_log_binomial,
)
from listcomm.errors import DomainError, ValidationError

from oracles import exhaustive_mode, factorial_binomial, overlap_distribution

LN_SQRT_2PI = 0.5 * math.log(2 * math.pi)


class TestLogBinomial:
    def test_examples(self):
        assert log_binomial(6, 3) == pytest.approx(math.log(20), abs=1e-12)
        assert log_binomial(5, 0) == 0.0
        assert log_binomial(10, 11) == -math.inf
        assert log_binomial(10, -1) == -math.inf

    def test_negative_A_rejected(self):
        with pytest.raises(DomainError):
            log_binomial(-1, 0)

    def test_matches_factorial_oracle(self):
        for A in range(61):
            for B in range(A + 1):
                exact = math.log(factorial_binomial(A, B))
                got = log_binomial(A, B)
                assert got == pytest.approx(exact, rel=1e-10, abs=1e-12)

    @pytest.mark.parametrize("A,B", [(5000, 100), (10**6, 999), (10**8, 9999), (3000, 1500)])
    def test_large_arguments_match_big_integers(self, A, B):
        exact = math.log(math.comb(A, B))
        assert log_binomial(A, B) == pytest.approx(exact, rel=1e-12)

    def test_huge_arguments_are_finite(self):
        v = log_binomial(2**63 - 1, 2**62)
        assert math.isfinite(v) and v > 0

    def test_pascal_rule(self):
        for A in range(1, 51):
            for B in range(1, A):
                lhs = math.exp(log_binomial(A, B))
                rhs = math.exp(log_binomial(A - 1, B - 1)) + math.exp(log_binomial(A - 1, B))
                assert lhs == pytest.approx(rhs, rel=1e-9)


class TestStirling:
    def test_direct_substitution(self):
        assert stirling_log_binomial(2, 1) == pytest.approx(2.5 * math.log(2), abs=1e-12)

    def test_offset_at_100_50(self):
        diff = stirling_log_binomial(100, 50) - log_binomial(100, 50)
        assert diff == pytest.approx(LN_SQRT_2PI, abs=0.01)

    def test_offset_converges_to_ln_sqrt_2pi(self):
        gaps = [
            abs(stirling_log_binomial(A, A // 2) - log_binomial(A, A // 2) - LN_SQRT_2PI)
            for A in (10**2, 10**3, 10**4)
        ]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 1e-3

    @pytest.mark.parametrize("A,B", [(5, 0), (5, 5), (5, 7), (3, -1)])
    def test_domain(self, A, B):
        with pytest.raises(DomainError):
            stirling_log_binomial(A, B)


class TestHypergeometric:
    p = HypergeomParams(6, 2, 3)

    def test_term_examples(self):
        assert hypergeom_log_term(self.p, 1) == pytest.approx(math.log(0.6), abs=1e-12)
        assert hypergeom_log_term(self.p, 5) == -math.inf

    def test_symmetric_in_K_and_L(self):
        q = HypergeomParams(6, 3, 2)
        for j in range(-1, 5):
            assert hypergeom_log_term(self.p, j) == pytest.approx(hypergeom_log_term(q, j))

    def test_tail_examples(self):
        assert hypergeom_tail_log(self.p, 1) == pytest.approx(math.log(0.8), abs=1e-12)
        assert hypergeom_tail_log(self.p, 0) == 0.0
        assert hypergeom_tail_log(self.p, 2) == pytest.approx(math.log(0.2), abs=1e-12)
        assert hypergeom_tail_log(self.p, 3) == -math.inf

    def test_tail_below_support_is_one(self):
        # K + L - M = 2, so at least two messages always overlap
        assert hypergeom_tail_log(HypergeomParams(5, 3, 4), 2) == 0.0

    def test_negative_threshold(self):
        with pytest.raises(DomainError):
            hypergeom_tail_log(self.p, -1)

    def test_invalid_params(self):
        with pytest.raises(ValidationError):
            HypergeomParams(4, 5, 1)
        with pytest.raises(ValidationError):
            HypergeomParams(4, 0, 1)

    @pytest.mark.parametrize("M,K,L", [(6, 2, 3), (7, 3, 3), (8, 5, 4), (5, 5, 2)])
    def test_against_enumeration(self, M, K, L):
        dist = overlap_distribution(M, K, L)
        hp = HypergeomParams(M, K, L)
        for j in range(min(K, L) + 1):
            expected = float(dist.get(j, 0))
            got = math.exp(hypergeom_log_term(hp, j))
            assert got == pytest.approx(expected, abs=1e-14)
        for T in range(min(K, L) + 2):
            expected = float(sum(v for j, v in dist.items() if j >= T))
            assert math.exp(hypergeom_tail_log(hp, T)) == pytest.approx(expected, abs=1e-14)

    def test_normalization_grid(self):
        for M in range(1, 41):
            for K in range(1, M + 1):
                for L in range(1, M + 1):
                    terms = np.exp([hypergeom_log_term(HypergeomParams(M, K, L), j) for j in range(min(K, L) + 1)])
                    assert abs(terms.sum() - 1.0) <= 1e-12

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 10**9).flatmap(
        lambda M: st.tuples(st.just(M), st.integers(1, min(M, 400)), st.integers(1, min(M, 400)))))
    def test_tail_is_a_log_probability(self, mkl):
        M, K, L = mkl
        hp = HypergeomParams(M, K, L)
        prev = 0.0
        for T in range(0, min(K, L) + 2, max(1, min(K, L) // 7)):
            v = hypergeom_tail_log(hp, T)
            assert v <= 0.0
            assert v <= prev + 1e-12
            prev = v


class TestRatioProfile:
    def test_unimodal_example(self):
        prof = ratio_profile(HypergeomParams(100, 20, 30))
        assert prof.shape is Shape.UNIMODAL
        assert prof.mode == 6
        assert prof.ratios[0] == pytest.approx(600 / 51)

    def test_decreasing_example(self):
        prof = ratio_profile(HypergeomParams(100, 2, 3))
        assert prof.shape is Shape.DECREASING
        assert prof.mode == 0
        assert prof.ratios[0] == pytest.approx(6 / 96)

    def test_mode_near_mean(self):
        assert ratio_profile(HypergeomParams(1000, 100, 200)).mode in {19, 20, 21}

    def test_zero_terms_give_infinite_ratios(self):
        prof = ratio_profile(HypergeomParams(5, 3, 4))
        assert np.isinf(prof.ratios[:2]).all()
        assert prof.mode == exhaustive_mode(5, 3, 4)

    def test_exhaustive_small_grid(self):
        for M in range(1, 31):
            for K in range(1, M + 1):
                for L in range(1, M + 1):
                    prof = ratio_profile(HypergeomParams(M, K, L))
                    assert np.all(np.diff(prof.ratios[np.isfinite(prof.ratios)]) <= 1e-12)
                    mode = exhaustive_mode(M, K, L)
                    assert prof.mode == mode
                    # the sequence rises at the start exactly when the argmax is past 0
                    assert (prof.shape is Shape.UNIMODAL) == (mode > 0)

    def test_huge_parameters(self):
        prof = ratio_profile(HypergeomParams(2**62, 2**20, 2**21))
        assert prof.mode == 0 and prof.shape is Shape.DECREASING


class TestLargeMApproximation:
    def test_domain(self):
        with pytest.raises(DomainError):
            prop2_log_approx(HypergeomParams(6, 2, 3), 2)
        with pytest.raises(DomainError):
            prop2_log_approx(HypergeomParams(6, 2, 3), 0)
        with pytest.raises(DomainError):
            prop2_log_approx(HypergeomParams(100, 10, 10), 1, k_max=0)

    def test_delta_first_term(self):
        M, K, L, j = 10**6, 10**3, 2 * 10**3, 3
        _, delta = prop2_log_approx(HypergeomParams(M, K, L), j, k_max=1)
        s = K + L - j
        expected = ((s**2 - K**2 - L**2) / M + j**2 / K + j**2 / L) / 2
        assert delta == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("j", [1, 2, 5])
    def test_first_exponent_agreement(self, j):
        # the per-n exponent gap vanishes: the log error settles to the
        # constant lost by dropping prefactors, ln j! + j - j ln j - ln(j)/2
        limit = math.lgamma(j + 1) + j - j * math.log(j) - 0.5 * math.log(j)
        errors = []
        for M, K in [(10**4, 10**2), (10**6, 10**3), (10**8, 10**4)]:
            hp = HypergeomParams(M, K, K)
            approx, _ = prop2_log_approx(hp, j)
            errors.append(approx - hypergeom_log_term(hp, j))
        gaps = [abs(e - limit) for e in errors]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 1e-3
        # relative to the exponent scale ln M the error vanishes
        assert abs(errors[2]) / math.log(10**8) < 0.06

    def test_truncation_converges(self):
        hp = HypergeomParams(10**5, 2000, 3000)
        vals = [prop2_log_approx(hp, 40, k)[0] for k in (2, 5, 10, 20)]
        diffs = np.abs(np.diff(vals))
        assert np.all(diffs[1:] <= diffs[:-1])
