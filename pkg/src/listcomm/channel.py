"""Discrete memoryless channels: construction, sampling, likelihood, capacity.

All information quantities are in nats.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from listcomm.errors import ConvergenceError, ValidationError

ROW_SUM_TOL = 1e-9

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 100_000


class ChannelKind(str, enum.Enum):
    BSC = "bsc"
    BEC = "bec"
    DMC = "dmc"


class CapacityMethod(str, enum.Enum):
    CLOSED_FORM = "ClosedForm"
    BLAHUT_ARIMOTO = "BlahutArimoto"


@dataclass(frozen=True, eq=False)
class ChannelModel:
    """A memoryless channel ``W(y|x)`` given by a row-stochastic matrix."""

    kind: ChannelKind
    matrix: np.ndarray
    param: float | None = None
    _cum: np.ndarray = field(init=False, repr=False)
    _log: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=float)
        m.setflags(write=False)
        cum = np.cumsum(m, axis=1)
        cum[:, -1] = 1.0
        with np.errstate(divide="ignore"):
            log = np.log(m)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_cum", cum)
        object.__setattr__(self, "_log", log)

    @property
    def input_size(self) -> int:
        return self.matrix.shape[0]

    @property
    def output_size(self) -> int:
        return self.matrix.shape[1]

    @property
    def log_matrix(self) -> np.ndarray:
        """Entry-wise ``ln W(y|x)``, ``-inf`` for impossible transitions."""
        return self._log

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChannelModel):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.matrix, other.matrix)

    def __hash__(self) -> int:
        return hash((self.kind, self.matrix.tobytes()))

    def describe(self) -> dict[str, Any]:
        """JSON description that :func:`build_channel` accepts."""
        if self.kind is ChannelKind.BSC:
            return {"type": "bsc", "p": self.param}
        if self.kind is ChannelKind.BEC:
            return {"type": "bec", "epsilon": self.param}
        return {"type": "dmc", "matrix": self.matrix.tolist()}


def _check_probability(name: str, value: Any) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a number, got {value!r}") from None
    if not 0.0 <= v <= 1.0:
        raise ValidationError(f"{name} must lie in [0, 1], got {v}")
    return v


def bsc(p: float) -> ChannelModel:
    p = _check_probability("p", p)
    return ChannelModel(ChannelKind.BSC, np.array([[1 - p, p], [p, 1 - p]]), p)


def bec(epsilon: float) -> ChannelModel:
    """Binary erasure channel; output symbol 1 is the erasure."""
    e = _check_probability("epsilon", epsilon)
    return ChannelModel(ChannelKind.BEC, np.array([[1 - e, e, 0.0], [0.0, e, 1 - e]]), e)


def dmc(matrix: Any) -> ChannelModel:
    try:
        m = np.array(matrix, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError("channel matrix must be a rectangular array of numbers") from None
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValidationError(f"channel matrix must be 2-D and non-empty, got shape {m.shape}")
    if not np.all(np.isfinite(m)) or np.any(m < 0) or np.any(m > 1):
        raise ValidationError("channel matrix entries must lie in [0, 1]")
    sums = m.sum(axis=1)
    for i, s in enumerate(sums):
        if abs(s - 1.0) > ROW_SUM_TOL:
            raise ValidationError(f"row {i} sums to {s:.12g}, not 1")
    return ChannelModel(ChannelKind.DMC, m)


def build_channel(spec: dict[str, Any] | ChannelModel) -> ChannelModel:
    """Build a channel from ``{"type": "bsc"|"bec"|"dmc", ...}``."""
    if isinstance(spec, ChannelModel):
        return spec
    if not isinstance(spec, dict) or "type" not in spec:
        raise ValidationError("channel description must be an object with a 'type' key")
    kind = str(spec["type"]).lower()
    if kind == "bsc":
        if "p" not in spec:
            raise ValidationError("bsc channel needs 'p'")
        return bsc(spec["p"])
    if kind == "bec":
        if "epsilon" not in spec:
            raise ValidationError("bec channel needs 'epsilon'")
        return bec(spec["epsilon"])
    if kind == "dmc":
        if "matrix" not in spec:
            raise ValidationError("dmc channel needs 'matrix'")
        return dmc(spec["matrix"])
    raise ValidationError(f"unknown channel type {spec['type']!r}")


def load_channel(path: str | Path) -> ChannelModel:
    try:
        spec = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read channel file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"channel file {path} is not valid JSON: {exc.msg}") from None
    return build_channel(spec)


def binary_entropy(p: float) -> float:
    """``H_b(p)`` in nats."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log(p) - (1 - p) * math.log1p(-p)


@dataclass(frozen=True)
class CapacityResult:
    nats: float
    method: CapacityMethod
    iterations: int
    gap_bound: float
    input_distribution: np.ndarray

    @property
    def bits(self) -> float:
        return self.nats / math.log(2)


def _divergences(W: np.ndarray, q: np.ndarray) -> np.ndarray:
    # D(W(.|x) || q) per input x, with 0 log 0 = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(W > 0, W * (np.log(W) - np.log(q)), 0.0)
    return terms.sum(axis=1)


def blahut_arimoto(
    W: np.ndarray, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> CapacityResult:
    """Capacity of a DMC by Blahut-Arimoto iteration.

    Starts from the uniform input law and stops once
    ``max_x D_x - ln sum_x r(x) e^{D_x} <= tol``; both quantities bracket
    the capacity.
    """
    if tol <= 0:
        raise ValidationError(f"tol must be positive, got {tol}")
    W = np.asarray(W, dtype=float)
    r = np.full(W.shape[0], 1.0 / W.shape[0])
    lower = upper = 0.0
    for it in range(1, max_iter + 1):
        q = r @ W
        D = _divergences(W, q)
        dmax = D.max()
        # shift by max for a stable exponent
        z = np.exp(D - dmax)
        s = float(r @ z)
        lower = dmax + math.log(s)
        upper = float(dmax)
        if upper - lower <= tol:
            return CapacityResult(
                nats=max(lower, 0.0),
                method=CapacityMethod.BLAHUT_ARIMOTO,
                iterations=it,
                gap_bound=upper - lower,
                input_distribution=r,
            )
        r = r * z / s
    raise ConvergenceError(
        f"Blahut-Arimoto did not reach tol={tol} in {max_iter} iterations "
        f"(bounds [{lower:.12g}, {upper:.12g}])",
        lower,
        upper,
        max_iter,
    )


def capacity(
    ch: ChannelModel,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    method: CapacityMethod | None = None,
) -> CapacityResult:
    """Shannon capacity in nats.

    BSC and BEC use their closed forms unless ``method`` forces
    Blahut-Arimoto; everything else is solved numerically.
    """
    if tol <= 0:
        raise ValidationError(f"tol must be positive, got {tol}")
    if method is not CapacityMethod.BLAHUT_ARIMOTO:
        uniform = np.full(ch.input_size, 1.0 / ch.input_size)
        if ch.kind is ChannelKind.BSC:
            c = math.log(2) - binary_entropy(ch.param)
            return CapacityResult(max(c, 0.0), CapacityMethod.CLOSED_FORM, 0, 0.0, uniform)
        if ch.kind is ChannelKind.BEC:
            c = (1 - ch.param) * math.log(2)
            return CapacityResult(c, CapacityMethod.CLOSED_FORM, 0, 0.0, uniform)
        if method is CapacityMethod.CLOSED_FORM:
            raise ValidationError("no closed form for a generic DMC")
    return blahut_arimoto(ch.matrix, tol, max_iter)


def capacity_achieving_input(ch: ChannelModel) -> np.ndarray:
    """Input law used for random codebooks: uniform for BSC/BEC, else the BA optimum."""
    return capacity(ch).input_distribution


def _check_symbols(ch: ChannelModel, x: np.ndarray, name: str, size: int) -> None:
    if x.size and (x.min() < 0 or x.max() >= size):
        raise ValidationError(f"{name} symbol out of range [0, {size})")


def apply_noise(ch: ChannelModel, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Map inputs ``x`` and uniforms ``u`` (same shape) to channel outputs.

    Output ``y`` is the smallest index whose cumulative row probability
    exceeds ``u``; this is the inverse-CDF sampler used by
    :func:`transmit` and by the batched simulator.
    """
    cum = ch._cum[x]
    y = (u[..., None] >= cum).sum(axis=-1)
    return np.minimum(y, ch.output_size - 1)


def transmit(ch: ChannelModel, x: Any, rng: np.random.Generator) -> np.ndarray:
    """Send word ``x`` through the channel, one uniform draw per symbol."""
    x = np.asarray(x, dtype=np.int64)
    _check_symbols(ch, x, "input", ch.input_size)
    u = rng.random(x.shape)
    return apply_noise(ch, x, u)


def log_likelihood(ch: ChannelModel, x: Any, y: Any) -> float:
    """``sum_t ln W(y_t | x_t)``; ``-inf`` for an impossible output."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if x.shape != y.shape:
        raise ValidationError(f"length mismatch: {x.shape} vs {y.shape}")
    _check_symbols(ch, x, "input", ch.input_size)
    _check_symbols(ch, y, "output", ch.output_size)
    return float(ch.log_matrix[x, y].sum())
