"""Log-domain binomials and the hypergeometric overlap terms.

Everything here works with natural logarithms. A log value of ``-inf``
stands for an exact zero, so sums of terms go through log-sum-exp and
never overflow for inputs up to ``2**63 - 1``.

The overlap term for a fixed ``K``-subset and a uniform ``L``-subset of
``[M]`` is::

    v_j = C(K, j) C(M - K, L - j) / C(M, L)

i.e. the probability that the two sets meet in exactly ``j`` elements.
Instantiating ``L := K`` gives the packing term ``w_j``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from listcomm.errors import DomainError, ValidationError

LogValue = float

# below these sizes math.comb is cheap and exact
_EXACT_MAX_A = 2000
_EXACT_MAX_B = 64

DEFAULT_K_MAX = 10


def log_binomial(A: int, B: int) -> LogValue:
    """Return ``ln C(A, B)``, or ``-inf`` when ``B`` is out of range."""
    if A < 0:
        raise DomainError(f"log_binomial needs A >= 0, got {A}")
    if B < 0 or B > A:
        return -math.inf
    b = min(B, A - B)
    if b == 0:
        return 0.0
    if A <= _EXACT_MAX_A or b <= _EXACT_MAX_B:
        return math.log(math.comb(A, b))
    return math.lgamma(A + 1) - math.lgamma(b + 1) - math.lgamma(A - b + 1)


def stirling_log_binomial(A: int, B: int) -> LogValue:
    """Log of ``A^(A+1/2) / (B^(B+1/2) (A-B)^(A-B+1/2))``.

    This is the Stirling form of the binomial with the ``e^{O(1/B)}``
    correction dropped and without the ``1/sqrt(2 pi)`` constant, so it
    exceeds the exact value by about ``ln sqrt(2 pi)`` for large ``B``.
    """
    if not 0 < B < A:
        raise DomainError(f"stirling_log_binomial needs 0 < B < A, got A={A}, B={B}")
    C = A - B
    return (A + 0.5) * math.log(A) - (B + 0.5) * math.log(B) - (C + 0.5) * math.log(C)


@dataclass(frozen=True)
class HypergeomParams:
    """Population ``M``, marked-set size ``K`` and draw size ``L``."""

    M: int
    K: int
    L: int

    def __post_init__(self) -> None:
        if not (1 <= self.K <= self.M and 1 <= self.L <= self.M):
            raise ValidationError(
                f"need 1 <= K <= M and 1 <= L <= M, got M={self.M}, K={self.K}, L={self.L}"
            )

    @property
    def support(self) -> tuple[int, int]:
        """Inclusive range of ``j`` where ``v_j > 0``."""
        return max(0, self.K + self.L - self.M), min(self.K, self.L)


def hypergeom_log_term(p: HypergeomParams, j: int) -> LogValue:
    """``ln v_j``; ``-inf`` outside the support."""
    lo, hi = p.support
    if j < lo or j > hi:
        return -math.inf
    return log_binomial(p.K, j) + log_binomial(p.M - p.K, p.L - j) - log_binomial(p.M, p.L)


def hypergeom_log_terms(p: HypergeomParams, start: int = 0) -> np.ndarray:
    """``ln v_j`` for ``j = start .. min(K, L)`` as an array."""
    hi = min(p.K, p.L)
    return np.array([hypergeom_log_term(p, j) for j in range(start, hi + 1)], dtype=float)


def hypergeom_tail_log(p: HypergeomParams, T: int) -> LogValue:
    """``ln sum_{j >= T} v_j``.

    When ``T`` reaches below the support the tail is the whole
    distribution and exactly ``0.0`` is returned.
    """
    if T < 0:
        raise DomainError(f"tail threshold must be >= 0, got {T}")
    lo, hi = p.support
    if T <= lo:
        return 0.0
    if T > hi:
        return -math.inf
    total = float(logsumexp(hypergeom_log_terms(p, T)))
    return min(total, 0.0)


class Shape(str, enum.Enum):
    DECREASING = "Decreasing"
    UNIMODAL = "Unimodal"


@dataclass(frozen=True)
class RatioProfile:
    """Successive ratios ``a_j = v_{j+1} / v_j`` with shape and mode.

    ``a_j`` is ``inf`` where ``v_j`` is zero but ``v_{j+1}`` is not
    (``j`` below the lower end of the support).
    """

    ratios: np.ndarray
    shape: Shape
    mode: int


def _ratio_exceeds_one(p: HypergeomParams, j: int) -> bool:
    num = (p.K - j) * (p.L - j)
    den = (p.M - p.K - p.L + j + 1) * (j + 1)
    if den <= 0:
        return True
    return num > den


def ratio_profile(p: HypergeomParams) -> RatioProfile:
    """Ratio sequence, shape and argmax of ``v_j``.

    The ratios are non-increasing in ``j`` so the mode is the first
    ``j`` with ``a_j <= 1``; it is located by bisection with exact
    integer comparisons. On ties (``a_j == 1``) the smaller index is
    returned.
    """
    s = min(p.K, p.L)
    j = np.arange(s, dtype=float)
    num = (p.K - j) * (p.L - j)
    den = (p.M - p.K - p.L + j + 1) * (j + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)

    lo, hi = 0, s
    while lo < hi:
        mid = (lo + hi) // 2
        if _ratio_exceeds_one(p, mid):
            lo = mid + 1
        else:
            hi = mid
    mode = lo
    shape = Shape.UNIMODAL if s > 0 and _ratio_exceeds_one(p, 0) else Shape.DECREASING
    return RatioProfile(ratios=ratios, shape=shape, mode=mode)


def prop2_delta(p: HypergeomParams, j: int, k_max: int = DEFAULT_K_MAX) -> float:
    """Truncated correction series of the large-``M`` approximation of ``v_j``."""
    M, K, L = p.M, p.K, p.L
    s = K + L - j
    delta = 0.0
    for k in range(1, k_max + 1):
        term = s * (s / M) ** k - K * (K / M) ** k - L * (L / M) ** k
        term += j * (j / K) ** k + j * (j / L) ** k
        delta += term / (k * (k + 1))
    return delta


def prop2_log_approx(
    p: HypergeomParams, j: int, k_max: int = DEFAULT_K_MAX
) -> tuple[LogValue, float]:
    """Approximate ``ln v_j`` as ``ln[(KLe/(Mj))^j / sqrt(j)] - delta``.

    Returns ``(approx, delta)``. The approximation holds to first
    exponent; it drops constant prefactors, so for fixed ``j`` the
    difference from the exact value tends to
    ``ln j! + j - j ln j - ln(j)/2`` rather than zero.
    """
    if not (0 < j < p.K and j < p.L):
        raise DomainError(f"need 0 < j < K and j < L, got j={j}, K={p.K}, L={p.L}")
    if k_max < 1:
        raise DomainError(f"k_max must be >= 1, got {k_max}")
    delta = prop2_delta(p, j, k_max)
    base = j * (math.log(p.K) + math.log(p.L) + 1.0 - math.log(p.M) - math.log(j))
    return base - 0.5 * math.log(j) - delta, delta
