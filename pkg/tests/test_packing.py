import itertools
import math

import pytest

from listcomm.errors import GuardExceeded, ValidationError
from listcomm.packing import (
    Packing,
    colex_subsets,
    gilbert_bound,
    greedy_packing,
    message_set,
    optimal_packing,
    t1_packing_size,
    verify_packing,
)

from oracles import factorial_binomial

SEEDS = range(10)


def oracle_gilbert(M, K, T):
    ball = sum(factorial_binomial(K, i) * factorial_binomial(M - K, K - i) for i in range(T, K + 1))
    total = factorial_binomial(M, K)
    return -(-total // ball)


def brute_force_max_packing(M, K, T):
    """Largest family by trying every subfamily, largest first."""
    subsets = list(itertools.combinations(range(1, M + 1), K))
    for size in range(len(subsets), 0, -1):
        for fam in itertools.combinations(subsets, size):
            if all(len(set(a) & set(b)) < T for a, b in itertools.combinations(fam, 2)):
                return size
    return 0


class TestMessageSet:
    def test_sorts(self):
        assert message_set([3, 1, 2], 5) == (1, 2, 3)

    @pytest.mark.parametrize("elements,K", [([1, 1], None), ([0, 2], None), ([1, 6], None), ([1, 2], 3)])
    def test_rejects(self, elements, K):
        with pytest.raises(ValidationError):
            message_set(elements, 5, K)


class TestGilbert:
    def test_examples(self):
        log_b, int_b = gilbert_bound(5, 3, 2)
        assert log_b == pytest.approx(math.log(10 / 7), abs=1e-12)
        assert int_b == 2
        assert gilbert_bound(4, 2, 2)[1] == 6
        assert gilbert_bound(7, 7, 1) == (0.0, 1)

    def test_against_integer_oracle(self):
        for M in range(1, 19):
            for K in range(1, min(M, 6) + 1):
                for T in range(1, min(K, 3) + 1):
                    assert gilbert_bound(M, K, T)[1] == oracle_gilbert(M, K, T)

    def test_large_inputs_give_log_only(self):
        log_b, int_b = gilbert_bound(10**12, 10**4, 2)
        assert int_b is None
        assert math.isfinite(log_b) and log_b > 0

    @pytest.mark.parametrize("args", [(5, 3, 4), (3, 4, 1), (5, 3, 0)])
    def test_precondition(self, args):
        with pytest.raises(ValidationError):
            gilbert_bound(*args)


class TestGreedy:
    def test_examples(self):
        p = greedy_packing(5, 3, 2, order_seed=0)
        assert len(p) == 2
        assert verify_packing(p) == (True, None)

        assert greedy_packing(6, 2, 1).sets == ((1, 2), (3, 4), (5, 6))
        assert set(greedy_packing(4, 2, 2, order_seed=3).sets) == set(itertools.combinations(range(1, 5), 2))

    def test_colex_order(self):
        assert colex_subsets(4, 2) == [(1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4)]

    def test_unseeded_follows_colex(self):
        p = greedy_packing(5, 3, 2)
        assert p.sets[0] == (1, 2, 3)

    def test_meets_gilbert_bound_across_seeds(self):
        for M in range(1, 19):
            for K in range(1, min(M, 6) + 1):
                for T in range(1, min(K, 3) + 1):
                    bound = oracle_gilbert(M, K, T)
                    for seed in SEEDS if T > 1 else [0]:
                        p = greedy_packing(M, K, T, order_seed=seed)
                        assert len(p) >= bound, (M, K, T, seed)
                        assert len(p) <= math.comb(M, K)
                        assert verify_packing(p)[0]

    def test_t1_is_disjoint_blocks(self):
        for M in range(1, 40):
            for K in range(1, M + 1):
                p = greedy_packing(M, K, 1, order_seed=5)
                assert len(p) == M // K == t1_packing_size(M, K)
                elems = [e for s in p.sets for e in s]
                assert len(elems) == len(set(elems))

    def test_seed_changes_order_not_validity(self):
        a = greedy_packing(9, 3, 2, order_seed=1)
        b = greedy_packing(9, 3, 2, order_seed=2)
        assert a.sets != b.sets
        assert verify_packing(a)[0] and verify_packing(b)[0]
        assert greedy_packing(9, 3, 2, order_seed=1) == a

    def test_guard(self):
        with pytest.raises(GuardExceeded):
            greedy_packing(60, 6, 2)


class TestVerify:
    def test_examples(self):
        assert verify_packing(Packing(5, 3, 2, ((1, 2, 3), (1, 4, 5)))) == (True, None)
        assert verify_packing(Packing(5, 3, 2, ((1, 2, 3), (1, 2, 4)))) == (False, (0, 1))
        assert verify_packing(Packing(5, 3, 2, ())) == (True, None)

    def test_first_violation_reported(self):
        p = Packing(6, 2, 1, ((1, 2), (3, 4), (4, 5), (2, 6)))
        assert verify_packing(p) == (False, (0, 3))

    def test_rejects_malformed_sets(self):
        with pytest.raises(ValidationError):
            Packing(5, 3, 2, ((1, 2),))


class TestOptimal:
    @pytest.mark.parametrize("M,K,T", [(4, 2, 2), (5, 2, 2), (5, 3, 2), (6, 3, 2), (5, 2, 1), (6, 3, 3)])
    def test_matches_brute_force(self, M, K, T):
        p = optimal_packing(M, K, T)
        assert verify_packing(p)[0]
        assert len(p) == brute_force_max_packing(M, K, T)

    def test_known_designs(self):
        # Fano plane and the affine plane of order 3
        assert len(optimal_packing(7, 3, 2)) == 7
        assert len(optimal_packing(9, 3, 2)) == 12

    def test_greedy_never_beats_optimal(self):
        for M, K, T in [(7, 3, 2), (8, 3, 2), (8, 4, 3), (9, 4, 2)]:
            best = len(optimal_packing(M, K, T))
            for seed in SEEDS:
                assert len(greedy_packing(M, K, T, order_seed=seed)) <= best

    def test_guard(self):
        with pytest.raises(GuardExceeded):
            optimal_packing(20, 5, 2)
