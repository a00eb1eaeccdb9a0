"""Command-line interface: ``sigma-race <subcommand> [options]``.

Exit status: 0 when every check verified, 2 when a counterexample or
violation was found, 1 on usage or internal errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from . import acceptance
from .congruence import PAPER_MODULUS, RaceModulus, beta_report, coprime_residues
from .race import (
    ENVELOPE_MIN_X,
    Direction,
    check_envelopes,
    check_weighted_bounds,
    log_grid,
    pointwise_scan,
    run_races,
)
from .reports import write_report
from .sieve import DEFAULT_SEGMENT_LEN, SEGMENT_CAPACITY

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2
SUBCOMMANDS = ("race", "beta", "envelope", "bounds", "scan", "selftest")


class UsageError(Exception):
    """Bad command line; the message names the offending flag."""


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    modulus: int = PAPER_MODULUS
    residues: Tuple[int, ...] = ()
    k_max: int = 10**6
    limit: int = 10**7
    truncate: int = 10**6
    grid_points: int = 64
    grid_min: int = 10**3
    grid_max: int = 10**6
    segment_len: int = DEFAULT_SEGMENT_LEN
    function: str = "sigma"
    direction: Optional[Direction] = None
    max_recorded: Optional[int] = 1000
    criteria: Tuple[int, ...] = ()
    output: Optional[str] = None
    fmt: str = "json"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(name: str):
    def conv(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}") from None
        if v < 1:
            raise argparse.ArgumentTypeError(f"{name} must be >= 1, got {v}")
        return v

    return conv


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--modulus", type=_positive("--modulus"), default=PAPER_MODULUS)
    common.add_argument("--segment-len", type=_positive("--segment-len"), default=DEFAULT_SEGMENT_LEN)
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    common.add_argument("--output", "-o", default=None, help="write report here instead of stdout")

    grid = _Parser(add_help=False)
    grid.add_argument("--grid-points", type=_positive("--grid-points"), default=64)
    grid.add_argument("--grid-min", type=_positive("--grid-min"), default=10**3)
    grid.add_argument("--grid-max", type=_positive("--grid-max"), default=10**6)

    parser = _Parser(prog="sigma-race", description="Divisor-sum races sigma(30n) vs sigma(30n+k).")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("race", parents=[common], help="exhaustive prefix-sum race")
    p.add_argument("--kmax", dest="k_max", type=_positive("--kmax"), default=10**6)
    p.add_argument("--residues", default="all", help='comma list or "all" (units mod q)')

    p = sub.add_parser("beta", parents=[common], help="Euler-product constant and truncated series")
    p.add_argument("--residue", type=int, default=0)
    p.add_argument("--truncate", type=_positive("--truncate"), default=10**6)

    p = sub.add_parser("envelope", parents=[common, grid], help="residual envelopes of the normalized sums")
    p.add_argument("--residue", type=int, default=0)

    p = sub.add_parser("bounds", parents=[common, grid], help="quadratic bounds and crossover (q = 30)")
    p.add_argument("--residues", default="all")

    p = sub.add_parser("scan", parents=[common], help="pointwise comparison f(qn) vs f(qn+k)")
    p.add_argument("--function", choices=("sigma", "phi"), default="sigma")
    p.add_argument("--residue", type=int, default=1)
    p.add_argument("--direction", choices=[d.value for d in Direction], default=None)
    p.add_argument("--limit", type=_positive("--limit"), default=10**7)
    p.add_argument("--max-recorded", type=int, default=1000, help="cap on listed violations; -1 for all")

    p = sub.add_parser("selftest", parents=[common], help="run the acceptance criteria")
    p.add_argument("--criteria", default="all", help='comma list of criterion numbers or "all"')
    return parser


def _residue_list(text: str, q: int, flag: str) -> Tuple[int, ...]:
    if text == "all":
        return coprime_residues(q)
    try:
        vals = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated integers or 'all', got {text!r}") from None
    if not vals:
        raise UsageError(f"{flag}: empty residue list")
    return vals


def parse_args(argv: Sequence[str]) -> RunConfig:
    """Parse and validate argv into a RunConfig; raises UsageError."""
    ns = _build_parser().parse_args(list(argv))
    q = ns.modulus
    base = dict(subcommand=ns.subcommand, modulus=q, segment_len=ns.segment_len, output=ns.output, fmt=ns.fmt)
    if ns.segment_len > SEGMENT_CAPACITY:
        raise UsageError(f"--segment-len: {ns.segment_len} exceeds capacity {SEGMENT_CAPACITY}")
    if ns.segment_len < q:
        raise UsageError(f"--segment-len: must be at least the modulus {q}")

    cmd = ns.subcommand
    if cmd == "race":
        res = _residue_list(ns.residues, q, "--residues")
        for k in res:
            if not 0 < k < q:
                raise UsageError(f"--residues: race residues need 0 < k < {q}, got {k}")
        return RunConfig(residues=res, k_max=ns.k_max, **base)
    if cmd in ("beta", "envelope"):
        if not 0 <= ns.residue < q:
            raise UsageError(f"--residue: need 0 <= k < {q}, got {ns.residue}")
        extra = {"truncate": ns.truncate} if cmd == "beta" else _grid_fields(ns)
        return RunConfig(residues=(ns.residue,), **extra, **base)
    if cmd == "bounds":
        if q != PAPER_MODULUS:
            raise UsageError("--modulus: the quadratic bounds are stated for q = 30 only")
        res = _residue_list(ns.residues, q, "--residues")
        for k in res:
            if math.gcd(k, q) != 1:
                raise UsageError(f"--residues: {k} is not coprime to 30")
        return RunConfig(residues=res, **_grid_fields(ns), **base)
    if cmd == "scan":
        if not 0 < ns.residue < q:
            raise UsageError(f"--residue: need 0 < k < {q}, got {ns.residue}")
        if ns.direction is None:
            direction = Direction.BASE_GREATER if ns.function == "sigma" else Direction.OFFSET_GREATER
        else:
            direction = Direction(ns.direction)
        if ns.max_recorded < -1:
            raise UsageError("--max-recorded: must be >= -1")
        cap = None if ns.max_recorded == -1 else ns.max_recorded
        return RunConfig(
            residues=(ns.residue,),
            limit=ns.limit,
            function=ns.function,
            direction=direction,
            max_recorded=cap,
            **base,
        )
    # selftest
    known = [c[0] for c in acceptance.CRITERIA]
    if ns.criteria == "all":
        crit = tuple(known)
    else:
        try:
            crit = tuple(int(t) for t in ns.criteria.split(","))
        except ValueError:
            raise UsageError(f"--criteria: expected numbers, got {ns.criteria!r}") from None
        for c in crit:
            if c not in known:
                raise UsageError(f"--criteria: no criterion {c}")
    return RunConfig(criteria=crit, **base)


def _grid_fields(ns) -> dict:
    if ns.grid_min < ENVELOPE_MIN_X:
        raise UsageError(f"--grid-min: must be >= {ENVELOPE_MIN_X}, got {ns.grid_min}")
    if ns.grid_max < ns.grid_min:
        raise UsageError("--grid-max: must be >= --grid-min")
    return {"grid_points": ns.grid_points, "grid_min": ns.grid_min, "grid_max": ns.grid_max}


def execute(cfg: RunConfig):
    """Run the configured computation; returns (report, all_verified)."""
    q, seg = cfg.modulus, cfg.segment_len
    if cfg.subcommand == "race":
        certs = run_races(cfg.residues, cfg.k_max, seg, q)
        report = certs[0] if len(certs) == 1 else certs
        return report, all(c.verified for c in certs)
    if cfg.subcommand == "beta":
        rep = beta_report(RaceModulus(q, cfg.residues[0]), cfg.truncate)
        return rep, rep.within_tail
    grid = log_grid(cfg.grid_points, cfg.grid_min, cfg.grid_max)
    if cfg.subcommand == "envelope":
        rep = check_envelopes(RaceModulus(q, cfg.residues[0]), grid, seg)
        return rep, rep.all_pass
    if cfg.subcommand == "bounds":
        rep = check_weighted_bounds(grid, cfg.residues, seg)
        return rep, rep.all_pass
    if cfg.subcommand == "scan":
        rep = pointwise_scan(
            cfg.function, cfg.residues[0], cfg.direction, cfg.limit, seg, q, max_recorded=cfg.max_recorded
        )
        return rep, rep.violation_count == 0
    raise ValueError(cfg.subcommand)


def _selftest(cfg: RunConfig) -> int:
    results = acceptance.run_all(cfg.criteria, echo=lambda s: print(s, file=sys.stderr, flush=True))
    if cfg.fmt == "json":
        text = json.dumps([r.to_dict() for r in results], indent=2) + "\n"
    else:
        text = "\n".join(r.line() for r in results) + "\n"
    if cfg.output and cfg.output != "-":
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed", file=sys.stderr)
    return EXIT_OK if passed == len(results) else EXIT_VIOLATION


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"sigma-race: usage error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        if cfg.subcommand == "selftest":
            return _selftest(cfg)
        report, ok = execute(cfg)
        text = write_report(report, cfg.fmt, cfg.output)
        if not cfg.output or cfg.output == "-":
            sys.stdout.write(text)
    except Exception as exc:  # noqa: BLE001 - reported via exit status 1
        print(f"sigma-race: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK if ok else EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
