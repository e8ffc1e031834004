"""Monte Carlo estimation of the average error and the list-decoding reduction.

Every trial draws from its own Philox stream keyed by the run seed with
the trial index in the high counter word, so a report depends only on
``(code, channel, trials, seed)`` and not on batching or worker count.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from listcomm.channel import ChannelModel, apply_noise
from listcomm.codes import (
    LedCode,
    all_outputs,
    build_led_code,
    decode_indices,
    encode_indices,
    evaluate_exact,
    led_decode,
    led_encode,
    transition_probabilities,
)
from listcomm.errors import GuardExceeded, ValidationError
from listcomm.feasibility import CodeParams, ParameterSchedule, evaluate_schedule_at_n
from listcomm.packing import MessageSet, Packing

CSV_COLUMNS = (
    "n",
    "M",
    "K",
    "L",
    "T",
    "trials",
    "enc_errors",
    "dec_errors",
    "led_errors",
    "lambda_hat",
    "ci95_halfwidth",
    "seed",
)

_CHUNK = 2048
MAX_SEED = 2**64 - 1


def trial_stream(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial of a seeded run."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, trial]))


@dataclass(frozen=True)
class SimReport:
    params: CodeParams
    trials: int
    enc_errors: int
    dec_errors: int
    led_errors: int
    lambda_hat: float
    ci95_halfwidth: float
    seed: int

    def row(self) -> list:
        p = self.params
        return [
            p.n, p.M, p.K, p.L, p.T, self.trials, self.enc_errors, self.dec_errors,
            self.led_errors, repr(self.lambda_hat), repr(self.ci95_halfwidth), self.seed,
        ]


def _run_trials(code: LedCode, ch: ChannelModel, seed: int, start: int, stop: int) -> tuple[int, int, int]:
    p = code.params
    lams = np.empty((stop - start, p.K), dtype=np.int64)
    noise = np.empty((stop - start, p.n))
    for k, t in enumerate(range(start, stop)):
        g = trial_stream(seed, t)
        lams[k] = g.choice(p.M, size=p.K, replace=False) + 1
        noise[k] = g.random(p.n)

    enc = encode_indices(code, lams)
    ok = enc >= 0
    n_enc = int(np.count_nonzero(~ok))
    if not ok.any():
        return n_enc, 0, n_enc
    x = code.inner.codewords[enc[ok]]
    y = apply_noise(ch, x, noise[ok])
    dec = decode_indices(code, y)
    n_dec = int(np.count_nonzero(dec != enc[ok]))
    decoded_lists = code.list_table[dec]
    hits = (decoded_lists[:, :, None] == lams[ok][:, None, :]).any(axis=2).sum(axis=1)
    n_led = n_enc + int(np.count_nonzero(hits < p.T))
    return n_enc, n_dec, n_led


def _run_chunk(args: tuple) -> tuple[int, int, int]:
    return _run_trials(*args)


def run_monte_carlo(
    code: LedCode,
    ch: ChannelModel | None = None,
    trials: int = 1000,
    seed: int = 0,
    workers: int = 1,
) -> SimReport:
    """Estimate the average error by sampling sender sets uniformly.

    Encoding failures score as errors. ``ch`` is the channel the code is
    sent over (defaults to the code's own).
    """
    ch = code.channel if ch is None else ch
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    if not 0 <= seed <= MAX_SEED:
        raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if workers < 1:
        raise ValidationError(f"workers must be >= 1, got {workers}")
    chunks = [(code, ch, seed, s, min(s + _CHUNK, trials)) for s in range(0, trials, _CHUNK)]
    if workers == 1 or len(chunks) == 1:
        parts = [_run_chunk(c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, chunks))
    enc, dec, led = (sum(col) for col in zip(*parts))
    lam = led / trials
    half = 1.96 * math.sqrt(lam * (1 - lam) / trials)
    return SimReport(code.params, trials, enc, dec, led, lam, half, seed)


def simulate_schedule(
    schedule: ParameterSchedule,
    ch: ChannelModel,
    rate_inner: float,
    trials: int,
    n_grid: Sequence[int],
    seed: int = 0,
    workers: int = 1,
) -> list[SimReport]:
    """One Monte Carlo report per block length; the code at ``n`` is seeded by ``(seed, n)``."""
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])) or not n_grid:
        raise ValidationError(f"n grid must be non-empty and strictly increasing, got {list(n_grid)}")
    reports = []
    for n in n_grid:
        params, _ = evaluate_schedule_at_n(schedule, n)
        code = build_led_code(params, rate_inner, ch, seed=[seed, n])
        reports.append(run_monte_carlo(code, ch, trials, seed, workers))
    return reports


def write_csv(reports: Iterable[SimReport], out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow(r.row())


def reports_to_csv(reports: Iterable[SimReport]) -> str:
    buf = io.StringIO()
    write_csv(reports, buf)
    return buf.getvalue()


@dataclass(frozen=True, eq=False)
class LdReduction:
    """A list-decoding code for ``|packing|`` messages built from an LED code.

    Message ``i`` (0-based) is sent as the sender set ``psi(P_i)``; the
    receiver lists every ``i`` with ``|psi^-1(g(y)) ∩ P_i| >= T`` and pads
    with the smallest unused indices up to ``C(L, T)`` entries (or all
    messages, if there are fewer).
    """

    base: LedCode
    packing: Packing
    permutation: tuple[int, ...]

    @property
    def ld_message_count(self) -> int:
        return len(self.packing)

    @property
    def ld_list_size(self) -> int:
        p = self.base.params
        return math.comb(p.L, p.T)

    def psi(self, s: Iterable[int]) -> MessageSet:
        return tuple(sorted(self.permutation[a - 1] for a in s))

    def psi_inverse(self, s: Iterable[int]) -> MessageSet:
        inv = self._inverse
        return tuple(sorted(inv[a - 1] for a in s))

    @property
    def _inverse(self) -> tuple[int, ...]:
        inv = [0] * len(self.permutation)
        for a, b in enumerate(self.permutation, start=1):
            inv[b - 1] = a
        return tuple(inv)

    def encode(self, i: int) -> int | None:
        """Inner codeword index for LD message ``i``; ``None`` on encoding failure."""
        return led_encode(self.base, self.psi(self.packing.sets[i]))

    def qualifying(self, led_list: Iterable[int]) -> list[int]:
        """LD messages whose packing block meets the pulled-back list in ``>= T``."""
        pulled = set(self.psi_inverse(led_list))
        T = self.packing.T
        return [i for i, s in enumerate(self.packing.sets) if len(pulled.intersection(s)) >= T]

    def pad(self, found: list[int]) -> list[int]:
        size = min(self.ld_list_size, self.ld_message_count)
        out = list(found)
        present = set(found)
        for i in range(self.ld_message_count):
            if len(out) >= size:
                break
            if i not in present:
                out.append(i)
        return out

    def decode(self, y) -> list[int]:
        """Padded LD list for channel output ``y``."""
        return self.pad(self.qualifying(led_decode(self.base, y)))


def _check_permutation(psi: Sequence[int], M: int) -> tuple[int, ...]:
    perm = tuple(int(v) for v in psi)
    if sorted(perm) != list(range(1, M + 1)):
        raise ValidationError(f"psi must be a permutation of 1..{M}")
    return perm


def build_ld_reduction(code: LedCode, packing: Packing, psi: Sequence[int]) -> LdReduction:
    p = code.params
    if (packing.M, packing.K, packing.T) != (p.M, p.K, p.T):
        raise ValidationError(
            f"packing (M,K,T)=({packing.M},{packing.K},{packing.T}) does not match "
            f"code ({p.M},{p.K},{p.T})"
        )
    return LdReduction(code, packing, _check_permutation(psi, p.M))


@dataclass(frozen=True)
class ReductionCheck:
    mean_lambda_ld: float
    mean_lambda_ld_padded: float
    lambda_avg: float
    max_abs_diff: float


REDUCTION_MAX_M = 5
REDUCTION_MAX_OUTPUTS = 10**4


def reduction_identity_check(
    code: LedCode, packing: Packing, ch: ChannelModel | None = None
) -> ReductionCheck:
    """Average the exact LD error over all ``M!`` permutations.

    ``mean_lambda_ld`` scores message ``i`` correct only when it qualifies
    on its own (the event the averaging argument is about); padding can
    only help, so ``mean_lambda_ld_padded <= mean_lambda_ld``.
    ``max_abs_diff`` compares ``mean_lambda_ld`` with the exact average
    error of the LED code.
    """
    ch = code.channel if ch is None else ch
    p = code.params
    n_out = ch.output_size**p.n
    if p.M > REDUCTION_MAX_M or n_out > REDUCTION_MAX_OUTPUTS:
        raise GuardExceeded(
            f"identity check needs M <= {REDUCTION_MAX_M} and |Y|^n <= {REDUCTION_MAX_OUTPUTS}"
        )
    if len(packing) == 0:
        raise ValidationError("packing is empty")
    ys = all_outputs(ch.output_size, p.n)
    dec = decode_indices(code, ys)
    probs = transition_probabilities(ch, code.inner.codewords, ys)
    lists = [code.list_at(j) for j in range(code.count)]

    total = total_padded = 0.0
    perms = list(itertools.permutations(range(1, p.M + 1)))
    for psi in perms:
        red = build_ld_reduction(code, packing, psi)
        qual = {j: set(red.qualifying(lists[j])) for j in np.unique(dec)}
        padded = {j: set(red.pad(sorted(q))) for j, q in qual.items()}
        err = err_padded = 0.0
        for i in range(len(packing)):
            enc = red.encode(i)
            if enc is None:
                err += 1.0
                err_padded += 1.0
                continue
            miss = np.array([i not in qual[j] for j in dec])
            miss_padded = np.array([i not in padded[j] for j in dec])
            err += float(probs[enc] @ miss)
            err_padded += float(probs[enc] @ miss_padded)
        total += err / len(packing)
        total_padded += err_padded / len(packing)

    mean_ld = total / len(perms)
    lam = evaluate_exact(code, ch).lambda_avg
    return ReductionCheck(mean_ld, total_padded / len(perms), lam, abs(mean_ld - lam))
