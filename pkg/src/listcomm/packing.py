"""Families of K-subsets of [M] whose pairwise intersections stay below T.

Messages are the integers ``1..M``; a message set is a sorted tuple.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from listcomm.combinatorics import HypergeomParams, hypergeom_tail_log, log_binomial
from listcomm.errors import GuardExceeded, ValidationError

MessageSet = tuple[int, ...]

ENUMERATION_GUARD = 10**7
OPTIMAL_GUARD = 5000
# exact integer Gilbert bound only while C(M, K) has a manageable size
_EXACT_LOG_LIMIT = 1e5


def message_set(elements: Iterable[int], M: int, K: int | None = None) -> MessageSet:
    """Validate and normalise a message set to a sorted tuple."""
    s = tuple(sorted(int(e) for e in elements))
    if len(set(s)) != len(s):
        raise ValidationError(f"message set has repeated elements: {s}")
    if s and (s[0] < 1 or s[-1] > M):
        raise ValidationError(f"message set {s} not within [1, {M}]")
    if K is not None and len(s) != K:
        raise ValidationError(f"message set {s} must have {K} elements")
    return s


@dataclass(frozen=True)
class Packing:
    M: int
    K: int
    T: int
    sets: tuple[MessageSet, ...]

    def __post_init__(self) -> None:
        sets = tuple(message_set(s, self.M, self.K) for s in self.sets)
        object.__setattr__(self, "sets", sets)

    def __len__(self) -> int:
        return len(self.sets)


def _check_mkt(M: int, K: int, T: int) -> None:
    if not (1 <= T <= K <= M):
        raise ValidationError(f"need 1 <= T <= K <= M, got M={M}, K={K}, T={T}")


def gilbert_bound(M: int, K: int, T: int) -> tuple[float, int | None]:
    """Sphere-covering lower bound on the size of a packing.

    Returns ``(log_bound, integer_bound)`` with
    ``log_bound = ln[C(M,K) / sum_{i>=T} C(K,i) C(M-K,K-i)]`` and
    ``integer_bound`` its ceiling, computed in exact integer arithmetic.
    ``integer_bound`` is ``None`` when ``C(M, K)`` is too large to form.
    """
    _check_mkt(M, K, T)
    log_bound = -hypergeom_tail_log(HypergeomParams(M, K, K), T)
    if log_binomial(M, K) > _EXACT_LOG_LIMIT:
        return log_bound, None
    total = math.comb(M, K)
    ball = sum(math.comb(K, i) * math.comb(M - K, K - i) for i in range(T, K + 1))
    return log_bound, -(-total // ball)


def t1_packing_size(M: int, K: int) -> int:
    """Size of the largest family of pairwise disjoint K-subsets of [M]."""
    return M // K


def colex_subsets(M: int, K: int) -> list[MessageSet]:
    """All K-subsets of [M] in colexicographic order."""
    # colex compares largest elements first
    subsets = list(itertools.combinations(range(1, M + 1), K))
    subsets.sort(key=lambda s: s[::-1])
    return subsets


def _incidence(subsets: Sequence[MessageSet], M: int) -> np.ndarray:
    inc = np.zeros((len(subsets), M), dtype=np.int16)
    idx = np.array(subsets, dtype=np.int64) - 1
    rows = np.repeat(np.arange(len(subsets)), idx.shape[1])
    inc[rows, idx.ravel()] = 1
    return inc


def greedy_packing(M: int, K: int, T: int, order_seed: int | None = None) -> Packing:
    """Greedy packing over all K-subsets in a seeded shuffle of colex order.

    Each subset is kept if it meets every kept subset in fewer than ``T``
    elements; the result is maximal, hence at least the Gilbert bound.
    ``T == 1`` uses the disjoint blocks ``{1..K}, {K+1..2K}, ...``.
    ``order_seed=None`` keeps plain colex order.
    """
    _check_mkt(M, K, T)
    if T == 1:
        blocks = [tuple(range(b * K + 1, (b + 1) * K + 1)) for b in range(M // K)]
        return Packing(M, K, T, tuple(blocks))
    if math.comb(M, K) > ENUMERATION_GUARD:
        raise GuardExceeded(f"C({M},{K}) exceeds the enumeration guard {ENUMERATION_GUARD}")

    subsets = colex_subsets(M, K)
    if order_seed is not None:
        perm = np.random.default_rng(order_seed).permutation(len(subsets))
        subsets = [subsets[i] for i in perm]
    inc = _incidence(subsets, M)
    alive = np.ones(len(subsets), dtype=bool)
    chosen = []
    for i in range(len(subsets)):
        if not alive[i]:
            continue
        chosen.append(subsets[i])
        alive &= (inc @ inc[i]) < T
    return Packing(M, K, T, tuple(chosen))


def verify_packing(p: Packing) -> tuple[bool, tuple[int, int] | None]:
    """Check all pairwise intersections; return the first violating pair if any."""
    masks = [frozenset(s) for s in p.sets]
    for i, j in itertools.combinations(range(len(masks)), 2):
        if len(masks[i] & masks[j]) >= p.T:
            return False, (i, j)
    return True, None


def optimal_packing(M: int, K: int, T: int) -> Packing:
    """Largest packing by exhaustive branch and bound.

    A maximum clique search in the compatibility graph (sets adjacent
    when they intersect in fewer than ``T`` elements), bounded by greedy
    colouring. Gated to ``C(M, K) <= 5000``; intended for oracle tests.
    """
    _check_mkt(M, K, T)
    if math.comb(M, K) > OPTIMAL_GUARD:
        raise GuardExceeded(f"C({M},{K}) exceeds the optimal-search guard {OPTIMAL_GUARD}")
    subsets = colex_subsets(M, K)
    inc = _incidence(subsets, M)
    compatible = (inc @ inc.T) < T
    N = len(subsets)
    adj = [0] * N
    for i in range(N):
        row = compatible[i].copy()
        row[i] = False
        adj[i] = sum(1 << int(j) for j in np.flatnonzero(row))

    best: list[int] = []

    def colour_order(cand: int) -> list[tuple[int, int]]:
        # vertices with their colour numbers, colour classes are independent sets
        out = []
        colour = 0
        uncoloured = cand
        while uncoloured:
            colour += 1
            avail = uncoloured
            while avail:
                v = avail.bit_length() - 1
                avail &= ~(1 << v)
                avail &= ~adj[v]
                uncoloured &= ~(1 << v)
                out.append((v, colour))
        return out

    def expand(current: list[int], cand: int) -> None:
        nonlocal best
        order = colour_order(cand)
        for v, c in reversed(order):
            if len(current) + c <= len(best):
                return
            current.append(v)
            new_cand = cand & adj[v]
            if new_cand:
                expand(current, new_cand)
            elif len(current) > len(best):
                best = list(current)
            current.pop()
            cand &= ~(1 << v)

    expand([], (1 << N) - 1)
    return Packing(M, K, T, tuple(subsets[i] for i in sorted(best)))
