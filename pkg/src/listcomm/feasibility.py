"""Finite-n feasibility statistics and the asymptotic rate/gap classifier.

Notation: a code sends a ``K``-subset of ``[M]`` in ``n`` channel uses,
the receiver answers with an ``L``-list, and decoding succeeds when the
two sets share at least ``T`` messages.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from listcomm.combinatorics import HypergeomParams, hypergeom_tail_log, log_binomial
from listcomm.errors import ValidationError

# largest value a schedule may produce
MAX_PARAM = 2**63 - 1


@dataclass(frozen=True)
class CodeParams:
    M: int
    K: int
    L: int
    T: int
    n: int

    def __post_init__(self) -> None:
        for name in ("M", "K", "L", "T", "n"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ValidationError(f"{name} must be a positive integer, got {v!r}")
        if self.K > self.M or self.L > self.M:
            raise ValidationError(f"need K, L <= M, got M={self.M}, K={self.K}, L={self.L}")
        if self.T > min(self.K, self.L):
            raise ValidationError(f"need T <= min(K, L), got T={self.T}, K={self.K}, L={self.L}")


def sufficient_statistic(p: CodeParams) -> float:
    """``(1/n) ln[C(M,L) / sum_{i>=T} C(K,i) C(M-K,L-i)]`` in nats per use.

    A feasible family exists when the limit of this quantity is below
    capacity.
    """
    tail = hypergeom_tail_log(HypergeomParams(p.M, p.K, p.L), p.T)
    return -tail / p.n


@dataclass(frozen=True)
class NecessaryStatistic:
    general: float
    t1: float | None


def necessary_statistic(p: CodeParams) -> NecessaryStatistic:
    """Statistics whose limits must not exceed capacity for a feasible family.

    ``general`` is ``(1/n) ln[(C(M,K)/C(L,T)) / sum_{i>=T} C(K,i) C(M-K,K-i)]``;
    ``t1`` is the sharper ``(1/n) ln(M/(KL))``, defined only for ``T == 1``.
    """
    packing_tail = hypergeom_tail_log(HypergeomParams(p.M, p.K, p.K), p.T)
    general = -(log_binomial(p.L, p.T) + packing_tail) / p.n
    t1 = None
    if p.T == 1:
        t1 = (math.log(p.M) - math.log(p.K) - math.log(p.L)) / p.n
    return NecessaryStatistic(general, t1)


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


@dataclass(frozen=True)
class GrowthLaw:
    """``value(n) = max(1, round(c * e^(rho n)))`` with ``c >= 1``, ``rho >= 0``."""

    c: float = 1.0
    rho: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.c) and self.c >= 1):
            raise ValidationError(f"prefactor c must be finite and >= 1, got {self.c}")
        if not (math.isfinite(self.rho) and self.rho >= 0):
            raise ValidationError(f"exponent rho must be finite and >= 0, got {self.rho}")

    def value(self, n: int) -> int:
        log_v = math.log(self.c) + self.rho * n
        if log_v > math.log(MAX_PARAM):
            raise ValidationError(f"growth law overflows at n={n}: c={self.c}, rho={self.rho}")
        return max(1, _round_half_up(self.c * math.exp(self.rho * n)))


@dataclass(frozen=True)
class ParameterSchedule:
    M: GrowthLaw
    K: GrowthLaw
    L: GrowthLaw
    T: GrowthLaw

    def __post_init__(self) -> None:
        if self.K.rho > self.M.rho or self.L.rho > self.M.rho:
            raise ValidationError(
                f"K and L may not grow faster than M (rho_M={self.M.rho}, "
                f"rho_K={self.K.rho}, rho_L={self.L.rho})"
            )

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ParameterSchedule:
        laws = {}
        for name in ("M", "K", "L", "T"):
            entry = data.get(name)
            if not isinstance(entry, dict):
                raise ValidationError(f"schedule entry {name!r} must be an object with 'c' and 'rho'")
            unknown = set(entry) - {"c", "rho"}
            if unknown:
                raise ValidationError(f"schedule entry {name!r} has unknown keys {sorted(unknown)}")
            try:
                laws[name] = GrowthLaw(float(entry.get("c", 1.0)), float(entry.get("rho", 0.0)))
            except (TypeError, ValueError) as exc:
                if isinstance(exc, ValidationError):
                    raise ValidationError(f"schedule entry {name!r}: {exc}") from None
                raise ValidationError(f"schedule entry {name!r} must hold numbers") from None
        return cls(**laws)

    def to_dict(self) -> dict[str, dict[str, float]]:
        return {k: {"c": getattr(self, k).c, "rho": getattr(self, k).rho} for k in "MKLT"}

    @property
    def constant_T(self) -> int:
        """The fixed threshold; rate and gap are only defined for constant ``T``."""
        if self.T.rho != 0:
            raise ValidationError(
                f"rate and gap need a constant threshold, got rho_T={self.T.rho}"
            )
        return self.T.value(1)


def load_schedule(path: str | Path) -> ParameterSchedule:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read schedule file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"schedule file {path} is not valid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ValidationError("schedule file must hold a JSON object")
    return ParameterSchedule.from_dict(data)


def rate(s: ParameterSchedule) -> float:
    """``lim (T/n) ln(MT/(KL)) = T0 (rho_M - rho_K - rho_L)``; may be negative."""
    t0 = s.constant_T
    return t0 * (s.M.rho - (s.K.rho + s.L.rho))


def gap(s: ParameterSchedule) -> float:
    """``0`` for ``T == 1``, else ``lim (T/n) ln(K/T) = T0 rho_K``."""
    t0 = s.constant_T
    if t0 == 1:
        return 0.0
    return t0 * s.K.rho


class Verdict(str, enum.Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class AsymptoticProfile:
    rate: float
    gap: float
    verdict: Verdict


def verdict(rate_value: float, gap_value: float, C: float) -> Verdict:
    """Feasible if rate < C (C > 0); infeasible if rate - gap > C."""
    if not math.isfinite(C) or C < 0:
        raise ValidationError(f"capacity must be finite and non-negative, got {C}")
    if C > 0 and rate_value < C:
        return Verdict.FEASIBLE
    if rate_value - gap_value > C:
        return Verdict.INFEASIBLE
    return Verdict.UNDETERMINED


def classify(s: ParameterSchedule, C: float) -> AsymptoticProfile:
    r, g = rate(s), gap(s)
    return AsymptoticProfile(r, g, verdict(r, g, C))


def evaluate_schedule_at_n(s: ParameterSchedule, n: int) -> tuple[CodeParams, bool]:
    """Instantiate the schedule at block length ``n``.

    ``K`` and ``L`` are clamped to ``M`` and ``T`` to ``min(K, L)``; the
    second return value reports whether any clamp was applied.
    """
    if n < 1:
        raise ValidationError(f"block length must be >= 1, got {n}")
    M, K, L, T = (law.value(n) for law in (s.M, s.K, s.L, s.T))
    K2, L2 = min(K, M), min(L, M)
    T2 = min(T, K2, L2)
    clamped = (K2, L2, T2) != (K, L, T)
    return CodeParams(M, K2, L2, T2, n), clamped
