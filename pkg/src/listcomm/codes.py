"""Random list-encoding/decoding codes built on an inner classical code.

The transmitter holds a table of ``L``-lists ``N_0, N_1, ...``, one per
inner codeword. A chosen ``K``-set is sent as the first codeword whose
list meets it in at least ``T`` messages. The receiver decodes the inner
codeword by maximum likelihood and outputs that codeword's list.

Codeword / list indices are 0-based; messages are ``1..M``.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterable, Sequence

import numpy as np

from listcomm.channel import ChannelModel, capacity_achieving_input
from listcomm.combinatorics import log_binomial
from listcomm.errors import GuardExceeded, ValidationError
from listcomm.feasibility import CodeParams
from listcomm.packing import MessageSet, colex_subsets, message_set

INNER_COUNT_GUARD = 10**6
EXACT_GUARD = 10**7
DUPLICATION_WARN_FACTOR = 1e3

# dense list-table incidence is used while M stays below this
_DENSE_M = 1 << 14
# cap on the (codewords x batch) work matrices per pass
_BATCH_CELLS = 1 << 22


@dataclass(frozen=True, eq=False)
class InnerCode:
    codewords: np.ndarray
    input_distribution: np.ndarray

    def __post_init__(self) -> None:
        cw = np.array(self.codewords, dtype=np.int64)
        if cw.ndim != 2 or cw.shape[0] < 1 or cw.shape[1] < 1:
            raise ValidationError(f"codewords must be a non-empty 2-D array, got shape {cw.shape}")
        cw.setflags(write=False)
        object.__setattr__(self, "codewords", cw)

    @property
    def count(self) -> int:
        return self.codewords.shape[0]

    @property
    def n(self) -> int:
        return self.codewords.shape[1]


@dataclass(frozen=True, eq=False)
class LedCode:
    """A concrete ``(M, K, L, T, n)`` code for one channel."""

    params: CodeParams
    list_table: np.ndarray
    inner: InnerCode
    channel: ChannelModel

    def __post_init__(self) -> None:
        p = self.params
        table = np.sort(np.array(self.list_table, dtype=np.int64), axis=1)
        if table.ndim != 2 or table.shape[1] != p.L:
            raise ValidationError(f"list table must have {p.L} columns")
        if table.shape[0] != self.inner.count:
            raise ValidationError(
                f"list table has {table.shape[0]} rows but the inner code has {self.inner.count} codewords"
            )
        if table.min() < 1 or table.max() > p.M:
            raise ValidationError(f"list entries must lie in [1, {p.M}]")
        if p.L > 1 and np.any(table[:, 1:] == table[:, :-1]):
            raise ValidationError("each list must hold distinct messages")
        if self.inner.n != p.n:
            raise ValidationError(f"codeword length {self.inner.n} differs from n={p.n}")
        cw = self.inner.codewords
        if cw.min() < 0 or cw.max() >= self.channel.input_size:
            raise ValidationError("codeword symbol outside the channel input alphabet")
        table.setflags(write=False)
        object.__setattr__(self, "list_table", table)

    @property
    def count(self) -> int:
        return self.inner.count

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LedCode):
            return NotImplemented
        return (
            self.params == other.params
            and self.channel == other.channel
            and np.array_equal(self.list_table, other.list_table)
            and np.array_equal(self.inner.codewords, other.inner.codewords)
        )

    __hash__ = None  # type: ignore[assignment]

    def prefix(self, count: int) -> LedCode:
        """The code restricted to its first ``count`` codewords and lists."""
        inner = InnerCode(self.inner.codewords[:count], self.inner.input_distribution)
        return LedCode(self.params, self.list_table[:count], inner, self.channel)

    def list_at(self, index: int) -> MessageSet:
        return tuple(int(v) for v in self.list_table[index])

    @cached_property
    def _incidence(self) -> np.ndarray | None:
        if self.params.M > _DENSE_M:
            return None
        inc = np.zeros((self.count, self.params.M + 1), dtype=np.uint8)
        np.put_along_axis(inc, self.list_table, 1, axis=1)
        return inc

    @cached_property
    def _onehot(self) -> list[np.ndarray]:
        cw = self.inner.codewords
        return [(cw == a).astype(np.float32) for a in range(self.channel.input_size)]


def inner_count(n: int, rate_inner: float) -> int:
    """Number of inner codewords, ``ceil(e^(n R))`` with ``R`` in nats."""
    x = math.exp(n * rate_inner)
    # e^(nR) landing a few ulps above an integer should not add a codeword
    nearest = round(x)
    if abs(x - nearest) <= 1e-12 * x:
        return max(1, int(nearest))
    return math.ceil(x)


def _random_lists(rng: np.random.Generator, count: int, M: int, L: int) -> np.ndarray:
    if count * M <= 2 * 10**7:
        keys = rng.random((count, M))
        idx = np.argpartition(keys, L - 1, axis=1)[:, :L] if L < M else np.tile(np.arange(M), (count, 1))
        return idx + 1
    rows = [rng.choice(M, size=L, replace=False) for _ in range(count)]
    return np.array(rows, dtype=np.int64) + 1


def build_led_code(
    p: CodeParams,
    rate_inner: float,
    ch: ChannelModel,
    seed: int | Sequence[int] | None = 0,
) -> LedCode:
    """Draw a random code: i.i.d. codewords and uniform ``L``-subset lists.

    Codeword symbols follow the capacity-achieving input law of ``ch``.
    Deterministic for a given ``seed``.
    """
    if not (math.isfinite(rate_inner) and rate_inner > 0):
        raise ValidationError(f"inner rate must be positive, got {rate_inner}")
    if p.n * rate_inner > math.log(INNER_COUNT_GUARD) + 1e-12:
        raise GuardExceeded(
            f"e^(n R) = e^{p.n * rate_inner:.3f} inner codewords exceeds the guard {INNER_COUNT_GUARD}"
        )
    count = inner_count(p.n, rate_inner)
    if math.log(count) > log_binomial(p.M, p.L) + math.log(DUPLICATION_WARN_FACTOR):
        warnings.warn(
            f"{count} lists drawn from only C({p.M},{p.L}) subsets; the table is heavily duplicated",
            stacklevel=2,
        )
    rng = np.random.default_rng(seed)
    dist = capacity_achieving_input(ch)
    codewords = rng.choice(ch.input_size, size=(count, p.n), p=dist)
    table = _random_lists(rng, count, p.M, p.L)
    return LedCode(p, table, InnerCode(codewords, dist), ch)


def _as_set_array(code: LedCode, sets: Iterable[Iterable[int]]) -> np.ndarray:
    p = code.params
    arr = np.array([message_set(s, p.M, p.K) for s in sets], dtype=np.int64)
    return arr.reshape(-1, p.K)


def overlap_counts(code: LedCode, sets: np.ndarray) -> np.ndarray:
    """``|N_i ∩ S_b|`` for every list ``i`` and every row ``S_b`` of ``sets``.

    ``sets`` is a ``(B, K)`` array of 1-based messages; the result has
    shape ``(count, B)``.
    """
    inc = code._incidence
    if inc is not None:
        return inc[:, sets].sum(axis=2, dtype=np.int64)
    out = np.empty((code.count, sets.shape[0]), dtype=np.int64)
    for b, s in enumerate(sets):
        out[:, b] = np.isin(code.list_table, s).sum(axis=1)
    return out


def encode_indices(code: LedCode, sets: np.ndarray) -> np.ndarray:
    """First list index meeting each set in ``>= T`` messages, ``-1`` if none."""
    out = np.empty(sets.shape[0], dtype=np.int64)
    step = max(1, _BATCH_CELLS // (code.count * code.params.K))
    for start in range(0, sets.shape[0], step):
        ok = overlap_counts(code, sets[start : start + step]) >= code.params.T
        first = np.argmax(ok, axis=0)
        out[start : start + ok.shape[1]] = np.where(ok[first, np.arange(ok.shape[1])], first, -1)
    return out


def led_encode(code: LedCode, lam: Iterable[int]) -> int | None:
    """Inner codeword index for sender set ``lam``; ``None`` on encoding failure."""
    sets = _as_set_array(code, [lam])
    idx = int(encode_indices(code, sets)[0])
    return None if idx < 0 else idx


def decode_indices(code: LedCode, ys: np.ndarray) -> np.ndarray:
    """Maximum-likelihood inner codeword for each row of ``ys``.

    Log-likelihoods are assembled from integer symbol-pair counts, so
    codewords hitting each transition probability equally often (on a
    BSC: codewords at equal Hamming distance) get bit-identical scores;
    ties go to the smallest index.
    """
    ys = np.atleast_2d(np.asarray(ys, dtype=np.int64))
    if ys.shape[1] != code.params.n:
        raise ValidationError(f"output word length {ys.shape[1]} differs from n={code.params.n}")
    ch = code.channel
    if ys.size and (ys.min() < 0 or ys.max() >= ch.output_size):
        raise ValidationError("output symbol out of range")
    logw = ch.log_matrix
    # integer counts are pooled per distinct log-probability before any
    # floating-point work, so equal likelihoods give equal scores
    finite = np.unique(logw[np.isfinite(logw) & (logw != 0.0)])
    groups = [[(a, b) for a, b in zip(*np.nonzero(logw == v))] for v in finite]
    impossible = list(zip(*np.nonzero(np.isneginf(logw))))
    out = np.empty(ys.shape[0], dtype=np.int64)
    step = max(1, min(1024, _BATCH_CELLS // code.count))
    for start in range(0, ys.shape[0], step):
        chunk = ys[start : start + step]
        outs = [(chunk == b).astype(np.float32).T for b in range(ch.output_size)]
        score = np.zeros((code.count, chunk.shape[0]))
        for v, pairs in zip(finite, groups):
            total = sum(code._onehot[a] @ outs[b] for a, b in pairs)
            score += total.astype(np.float64) * v
        for a, b in impossible:
            score[(code._onehot[a] @ outs[b]) > 0] = -np.inf
        out[start : start + chunk.shape[0]] = np.argmax(score, axis=0)
    return out


def led_decode(code: LedCode, y: Any) -> MessageSet:
    """The list attached to the maximum-likelihood inner codeword."""
    return code.list_at(int(decode_indices(code, y)[0]))


@dataclass(frozen=True)
class ExactEvaluation:
    lambda_avg: float
    lambda_per_set: dict[MessageSet, float]
    p_enc_err: float
    p_dec_err: float


def all_outputs(size: int, n: int) -> np.ndarray:
    """Every output word of length ``n``, in lexicographic order."""
    return np.array(list(itertools.product(range(size), repeat=n)), dtype=np.int64).reshape(-1, n)


def transition_probabilities(ch: ChannelModel, codewords: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """``W(y|u)`` for every codeword row and output row."""
    return ch.matrix[codewords[:, None, :], ys[None, :, :]].prod(axis=2)


def evaluate_exact(code: LedCode, ch: ChannelModel | None = None) -> ExactEvaluation:
    """Exact per-set and average error probabilities by full enumeration.

    ``ch`` is the channel the code is used on (defaults to the one it was
    designed for); the decoder always uses the design channel. A set the
    encoder cannot place counts as an error with probability one.
    ``p_dec_err`` is the probability, for a uniform sender set, that the
    set is encoded but the inner decoder picks another codeword.
    """
    ch = code.channel if ch is None else ch
    p = code.params
    if ch.input_size != code.channel.input_size or ch.output_size != code.channel.output_size:
        raise ValidationError("evaluation channel alphabets differ from the code's channel")
    n_sets = math.comb(p.M, p.K)
    n_out = ch.output_size**p.n
    if n_sets * n_out > EXACT_GUARD:
        raise GuardExceeded(f"C(M,K) * |Y|^n = {n_sets * n_out} exceeds the guard {EXACT_GUARD}")

    sets = np.array(colex_subsets(p.M, p.K), dtype=np.int64)
    enc = encode_indices(code, sets)
    ys = all_outputs(ch.output_size, p.n)
    dec = decode_indices(code, ys)

    ok = enc >= 0
    used = np.unique(enc[ok])
    probs = np.zeros((code.count, n_out))
    if used.size:
        probs[used] = transition_probabilities(ch, code.inner.codewords[used], ys)

    # fail[b, y]: decoded list for y meets set b in fewer than T messages
    ov = overlap_counts(code, sets)
    fail = ov[dec, :].T < p.T
    lam = np.ones(n_sets)
    rows = probs[enc[ok]]
    lam[ok] = (rows * fail[ok]).sum(axis=1)
    dec_wrong = dec[None, :] != enc[ok][:, None]
    dec_err = (rows * dec_wrong).sum(axis=1)

    per_set = {tuple(int(v) for v in s): float(l) for s, l in zip(sets, lam)}
    return ExactEvaluation(
        lambda_avg=float(lam.mean()),
        lambda_per_set=per_set,
        p_enc_err=float(np.mean(~ok)),
        p_dec_err=float(dec_err.sum() / n_sets),
    )
