"""Command-line front end.

Exit codes: 0 on success, 2 on invalid input, 1 on runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from listcomm.channel import ChannelModel, capacity, load_channel
from listcomm.combinatorics import HypergeomParams, hypergeom_log_term, prop2_log_approx
from listcomm.errors import DomainError, ListCommError, ValidationError
from listcomm.feasibility import (
    CodeParams,
    ParameterSchedule,
    classify,
    load_schedule,
    necessary_statistic,
    sufficient_statistic,
)
from listcomm.packing import gilbert_bound, greedy_packing
from listcomm.sim import MAX_SEED, simulate_schedule, write_csv


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


@dataclass
class RunConfig:
    subcommand: str
    channel: ChannelModel | None = None
    schedule: ParameterSchedule | None = None
    params: CodeParams | None = None
    rate_inner: float | None = None
    trials: int | None = None
    n_grid: list[int] = field(default_factory=list)
    seed: int = 0
    out: Path | None = None


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v <= MAX_SEED:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {v}")
    return v


def _n_grid(text: str) -> list[int]:
    try:
        grid = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"n grid must be comma-separated integers, got {text!r}") from None
    if not grid or any(n < 1 for n in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise argparse.ArgumentTypeError(f"n grid must be positive and strictly increasing, got {text!r}")
    return grid


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="listcomm", description="List encoding/decoding over noisy channels.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("capacity", help="Shannon capacity of a channel")
    p.add_argument("--channel", required=True)
    p.add_argument("--tol", type=_positive_float, default=1e-9)

    p = sub.add_parser("feasibility", help="finite-n sufficient/necessary statistics")
    for name in ("M", "K", "L", "T", "n"):
        p.add_argument(f"--{name}", type=_positive_int, required=True)
    p.add_argument("--channel", required=True)

    p = sub.add_parser("classify", help="asymptotic rate, gap and verdict of a schedule")
    p.add_argument("--schedule", required=True)
    p.add_argument("--channel", required=True)

    p = sub.add_parser("packing", help="greedy packing with pairwise intersections < T")
    for name in ("M", "K", "T"):
        p.add_argument(f"--{name}", type=_positive_int, required=True)
    p.add_argument("--seed", type=_seed, default=0)

    p = sub.add_parser("simulate", help="Monte Carlo error estimates over a grid of n")
    p.add_argument("--schedule", required=True)
    p.add_argument("--channel", required=True)
    p.add_argument("--rate-inner", type=_positive_float, required=True)
    p.add_argument("--trials", type=_positive_int, required=True)
    p.add_argument("--n-grid", type=_n_grid, required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out", default="-")

    p = sub.add_parser("asymptotics", help="exact vs large-M approximation of ln v_j")
    for name in ("M", "K", "L"):
        p.add_argument(f"--{name}", type=_positive_int, required=True)
    p.add_argument("--jmax", type=_positive_int, required=True)
    p.add_argument("--kmax", type=_positive_int, default=10)
    return parser


def _emit_json(obj: dict, out) -> None:
    out.write(json.dumps(obj) + "\n")


def _cmd_capacity(args, out) -> None:
    res = capacity(load_channel(args.channel), tol=args.tol)
    _emit_json(
        {
            "capacity_nats": res.nats,
            "capacity_bits": res.bits,
            "method": res.method.value,
            "iterations": res.iterations,
            "gap_bound": res.gap_bound,
        },
        out,
    )


def _cmd_feasibility(args, out) -> None:
    params = CodeParams(args.M, args.K, args.L, args.T, args.n)
    ch = load_channel(args.channel)
    C = capacity(ch).nats
    suff = sufficient_statistic(params)
    nec = necessary_statistic(params)
    necessary_ok = nec.general <= C and (nec.t1 is None or nec.t1 <= C)
    _emit_json(
        {
            "M": params.M, "K": params.K, "L": params.L, "T": params.T, "n": params.n,
            "capacity_nats": C,
            "capacity_bits": C / math.log(2),
            "sufficient_statistic": suff,
            "necessary_statistic_general": nec.general,
            "necessary_statistic_t1": nec.t1,
            "sufficient_condition_holds": suff < C,
            "necessary_condition_holds": necessary_ok,
        },
        out,
    )


def _cmd_classify(args, out) -> None:
    schedule = load_schedule(args.schedule)
    C = capacity(load_channel(args.channel)).nats
    prof = classify(schedule, C)
    _emit_json(
        {"rate": prof.rate, "gap": prof.gap, "capacity_nats": C, "verdict": prof.verdict.value},
        out,
    )


def _cmd_packing(args, out) -> None:
    packing = greedy_packing(args.M, args.K, args.T, order_seed=args.seed)
    log_bound, int_bound = gilbert_bound(args.M, args.K, args.T)
    _emit_json(
        {
            "M": args.M, "K": args.K, "T": args.T,
            "gilbert_bound": int_bound if int_bound is not None else math.exp(log_bound),
            "size": len(packing),
            "sets": [list(s) for s in packing.sets],
        },
        out,
    )


def _cmd_simulate(args, out) -> None:
    config = RunConfig(
        subcommand="simulate",
        channel=load_channel(args.channel),
        schedule=load_schedule(args.schedule),
        rate_inner=args.rate_inner,
        trials=args.trials,
        n_grid=args.n_grid,
        seed=args.seed,
        out=None if args.out == "-" else Path(args.out),
    )
    reports = simulate_schedule(
        config.schedule, config.channel, config.rate_inner, config.trials,
        config.n_grid, config.seed, workers=args.workers,
    )
    if config.out is None:
        write_csv(reports, out)
    else:
        with open(config.out, "w", newline="") as fh:
            write_csv(reports, fh)


def _cmd_asymptotics(args, out) -> None:
    hp = HypergeomParams(args.M, args.K, args.L)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["j", "exact_log", "approx_log", "delta", "abs_error"])
    for j in range(1, min(args.jmax, hp.K - 1, hp.L - 1) + 1):
        exact = hypergeom_log_term(hp, j)
        approx, delta = prop2_log_approx(hp, j, args.kmax)
        w.writerow([j, repr(exact), repr(approx), repr(delta), repr(abs(approx - exact))])


_COMMANDS = {
    "capacity": _cmd_capacity,
    "feasibility": _cmd_feasibility,
    "classify": _cmd_classify,
    "packing": _cmd_packing,
    "simulate": _cmd_simulate,
    "asymptotics": _cmd_asymptotics,
}


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        _COMMANDS[args.command](args, out)
    except (UsageError, ValidationError, DomainError) as exc:
        err.write(f"listcomm: error: {exc}\n")
        return 2
    except ListCommError as exc:
        err.write(f"listcomm: {type(exc).__name__}: {exc}\n")
        return 1
    return 0
