"""Divisor-sum races between the progressions q*n and q*n + k.

Everything here streams blocks of n through the segmented sieve. A block
[n0, n1) is sieved once as the contiguous range [q*n0, q*n1) and reshaped
to a (n1 - n0, q) matrix whose column k holds f(q*n + k), so every residue
shares a single sieve pass. Per-block reductions (totals, prefix minima,
chunk sums) are combined strictly in block order.

Integer sums are exact (Python ints across blocks, int64 inside a block
with an overflow guard). Normalized sums sigma(n)/n use exactly rounded
``math.fsum`` per chunk; their rounding error is far below the envelope
slack, which grows like log x.
"""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .congruence import (
    PAPER_MODULUS,
    PAPER_RESIDUES,
    RaceModulus,
    beta_closed,
)
from .errors import ArithmeticOverflowError
from .sieve import (
    DEFAULT_SEGMENT_LEN,
    ordered_map,
    progression_blocks,
    progression_matrix,
)

ENVELOPE_MIN_X = 1000
_I128_MAX = (1 << 127) - 1
_BLOCK_SUM_LIMIT = 1 << 62


def _check_block(column: np.ndarray) -> None:
    if column.size and int(np.abs(column).max()) * column.size >= _BLOCK_SUM_LIMIT:
        raise ArithmeticOverflowError("block sum could overflow int64; use a shorter segment")


def _check_i128(value: int) -> int:
    if abs(value) > _I128_MAX:
        raise ArithmeticOverflowError(f"running total {value} exceeds 128 bits")
    return value


def _check_grid(grid: Sequence[int], minimum: int = ENVELOPE_MIN_X) -> List[int]:
    grid = [int(x) for x in grid]
    if not grid:
        raise ValueError("grid must be nonempty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly ascending")
    if grid[0] < minimum:
        raise ValueError(f"grid entries must be >= {minimum}, got {grid[0]}")
    return grid


def log_grid(points: int = 64, lo: int = 10**3, hi: int = 10**6) -> List[int]:
    """Log-spaced integers in [lo, hi], deduplicated and ascending."""
    if points < 1 or lo < 1 or hi < lo:
        raise ValueError("need points >= 1 and 1 <= lo <= hi")
    raw = np.rint(np.geomspace(lo, hi, points)).astype(np.int64)
    return sorted(set(int(x) for x in raw))


def progression_count(m: RaceModulus, d: int, x: int) -> int:
    """Number of 1 <= n <= x with q*n + k = 0 (mod d)."""
    g = math.gcd(m.q, d)
    if m.k % g:
        return 0
    step = d // g
    n0 = (-(m.k // g) * pow(m.q // g, -1, step)) % step if step > 1 else 0
    if n0 == 0:
        return x // step
    return 0 if n0 > x else (x - n0) // step + 1


def envelope(m: RaceModulus, x: int) -> Tuple[float, float]:
    """Two-sided bound on S(x) - beta*x valid for x >= 1000.

    With B the largest solution count (30 for k = 0, 1 for k coprime to 30)
    and N = q*x + k the band is B(ln N + 1) wide on each side, plus the
    series tail x * sum_{d>N} B(d)/d^2 on top: below 2 when k = 0 and below 1
    otherwise, since then B <= q/2.
    """
    b = m.max_count
    spread = b * (math.log(m.term(x)) + 1)
    return -spread, spread + (2 if m.k == 0 else 1)


@dataclass(frozen=True)
class ResidualSample:
    x: int
    normalized_sum: float
    beta_term: float
    residual: float
    envelope_lo: float
    envelope_hi: float

    @property
    def passes(self) -> bool:
        return self.envelope_lo < self.residual < self.envelope_hi

    @property
    def slack(self) -> float:
        return min(self.residual - self.envelope_lo, self.envelope_hi - self.residual)


@dataclass(frozen=True)
class EnvelopeReport:
    modulus: RaceModulus
    samples: Tuple[ResidualSample, ...]
    all_pass: bool
    worst_slack: float


def _block_chunks(args):
    """Per residue: fsum of sigma(n)/n over the block, cut after each grid point."""
    (n0, n1), q, residues, cuts = args
    mat = progression_matrix("sigma", q, n0, n1)
    n = np.arange(n0, n1, dtype=np.int64) * q
    edges = [c - n0 + 1 for c in cuts]
    out = {}
    for k in residues:
        ratio = mat[:, k] / (n + k).astype(np.float64)
        pieces = np.split(ratio, edges)
        out[k] = [math.fsum(p) for p in pieces]
    return out


def _grid_assignments(blocks, grid):
    idx, out = 0, []
    for n0, n1 in blocks:
        cuts = []
        while idx < len(grid) and grid[idx] < n1:
            cuts.append(grid[idx])
            idx += 1
        out.append(cuts)
    return out


def normalized_sums(
    q: int,
    residues: Sequence[int],
    grid: Sequence[int],
    segment_len: int = DEFAULT_SEGMENT_LEN,
) -> Dict[int, List[float]]:
    """S_k(x) = sum_{m<=x} sigma(q*m+k)/(q*m+k) at every x in the ascending grid."""
    grid = [int(x) for x in grid]
    blocks = progression_blocks(q, grid[-1], segment_len)
    cuts = _grid_assignments(blocks, grid)
    acc: Dict[int, List[float]] = {k: [] for k in residues}
    res: Dict[int, List[float]] = {k: [] for k in residues}
    jobs = [(b, q, tuple(residues), c) for b, c in zip(blocks, cuts)]
    for chunk in ordered_map(_block_chunks, jobs):
        for k in residues:
            pieces = chunk[k]
            for piece in pieces[:-1]:
                acc[k].append(piece)
                res[k].append(math.fsum(acc[k]))
            acc[k].append(pieces[-1])
    return res


def _sample(m: RaceModulus, x: int, s: float, beta: float) -> ResidualSample:
    lo, hi = envelope(m, x)
    bt = beta * x
    return ResidualSample(x, s, bt, s - bt, lo, hi)


def normalized_sum(m: RaceModulus, x: int, segment_len: int = DEFAULT_SEGMENT_LEN) -> ResidualSample:
    """S(x) (k = 0) or T_k(x), its beta*x main term and the residual g(x) / h_k(x)."""
    if x < 1:
        raise ValueError("x must be >= 1")
    s = normalized_sums(m.q, [m.k], [x], segment_len)[m.k][0]
    return _sample(m, x, s, beta_closed(m).numeric)


def check_envelopes_many(
    moduli: Sequence[RaceModulus],
    x_grid: Sequence[int],
    segment_len: int = DEFAULT_SEGMENT_LEN,
) -> List[EnvelopeReport]:
    """Envelope reports for several residues of one modulus, from one sieve pass."""
    grid = _check_grid(x_grid)
    qs = {m.q for m in moduli}
    if len(qs) != 1:
        raise ValueError("all moduli must share q")
    sums = normalized_sums(qs.pop(), sorted({m.k for m in moduli}), grid, segment_len)
    reports = []
    for m in moduli:
        beta = beta_closed(m).numeric
        samples = tuple(_sample(m, x, s, beta) for x, s in zip(grid, sums[m.k]))
        reports.append(
            EnvelopeReport(
                m,
                samples,
                all(s.passes for s in samples),
                min(s.slack for s in samples),
            )
        )
    return reports


def check_envelopes(
    m: RaceModulus, x_grid: Sequence[int], segment_len: int = DEFAULT_SEGMENT_LEN
) -> EnvelopeReport:
    return check_envelopes_many([m], x_grid, segment_len)[0]


def _block_prefix_sums(args):
    (n0, n1), q, residues, cuts = args
    mat = progression_matrix("sigma", q, n0, n1)
    idx = [c - n0 for c in cuts]
    out = {}
    for k in residues:
        col = mat[:, k]
        _check_block(col)
        cs = np.cumsum(col)
        out[k] = ([int(cs[i]) for i in idx], int(cs[-1]))
    return out


def exact_prefix_sums(
    q: int,
    residues: Sequence[int],
    grid: Sequence[int],
    segment_len: int = DEFAULT_SEGMENT_LEN,
) -> Dict[int, List[int]]:
    """sum_{m<=x} sigma(q*m+k) exactly at every x in the ascending grid."""
    grid = [int(x) for x in grid]
    blocks = progression_blocks(q, grid[-1], segment_len)
    cuts = _grid_assignments(blocks, grid)
    offset = {k: 0 for k in residues}
    res: Dict[int, List[int]] = {k: [] for k in residues}
    jobs = [(b, q, tuple(residues), c) for b, c in zip(blocks, cuts)]
    for chunk in ordered_map(_block_prefix_sums, jobs):
        for k in residues:
            at_cuts, total = chunk[k]
            res[k].extend(offset[k] + v for v in at_cuts)
            offset[k] = _check_i128(offset[k] + total)
    return res


@dataclass(frozen=True)
class WeightedBoundRow:
    """One (x, k) line of the quadratic-bound chain.

    lower_bound = 15 beta_0 x^2 - 2000 x ln(30x) must lie below base_sum,
    upper_bound = 15 beta_k x^2 + 100 x ln(30x + k) above offset_sum, and
    crossover_gap = lower_bound - upper_bound must be positive.
    """

    x: int
    k: int
    base_sum: int
    lower_bound: float
    offset_sum: int
    upper_bound: float
    crossover_gap: float

    @property
    def lower_holds(self) -> bool:
        return self.base_sum > self.lower_bound

    @property
    def upper_holds(self) -> bool:
        return self.offset_sum < self.upper_bound

    @property
    def crossover_holds(self) -> bool:
        return self.crossover_gap > 0

    @property
    def passes(self) -> bool:
        return self.lower_holds and self.upper_holds and self.crossover_holds


@dataclass(frozen=True)
class WeightedBoundReport:
    rows: Tuple[WeightedBoundRow, ...]
    all_pass: bool


def quadratic_lower_bound(x: int) -> float:
    beta0 = beta_closed(RaceModulus(30, 0)).numeric
    return 15 * beta0 * x * x - 2000 * x * math.log(30 * x)


def quadratic_upper_bound(k: int, x: int) -> float:
    beta_k = beta_closed(RaceModulus(30, k)).numeric
    return 15 * beta_k * x * x + 100 * x * math.log(30 * x + k)


def check_weighted_bounds(
    x_grid: Sequence[int],
    residues: Sequence[int] = PAPER_RESIDUES,
    segment_len: int = DEFAULT_SEGMENT_LEN,
) -> WeightedBoundReport:
    """Check the quadratic bounds on the raw sigma sums of 30m and 30m+k."""
    grid = _check_grid(x_grid)
    for k in residues:
        if math.gcd(k, PAPER_MODULUS) != 1:
            raise ValueError(f"residue {k} is not coprime to 30")
    sums = exact_prefix_sums(PAPER_MODULUS, [0, *residues], grid, segment_len)
    rows = []
    for i, x in enumerate(grid):
        lower = quadratic_lower_bound(x)
        for k in residues:
            upper = quadratic_upper_bound(k, x)
            rows.append(WeightedBoundRow(x, k, sums[0][i], lower, sums[k][i], upper, lower - upper))
    rows = tuple(rows)
    return WeightedBoundReport(rows, all(r.passes for r in rows))


def _sigma_column(m: RaceModulus, x: int) -> np.ndarray:
    return progression_matrix("sigma", m.q, 1, x + 1)[:, m.k]


def abel_identity_sides(m: RaceModulus, x: int) -> Tuple[int, float]:
    """Both sides of sum_{n<=x} a_n (T(n) - T(n-1)) with a_n = q*n + k.

    Left: the exact integer sum of sigma(q*n + k). Right:
    (q*x + k) T(x) - q * sum_{n<=x-1} T(n), with T the normalized sum.
    """
    if x < 1:
        raise ValueError("x must be >= 1")
    col = _sigma_column(m, x)
    n = np.arange(1, x + 1, dtype=np.int64)
    ratio = col / (m.q * n + m.k).astype(np.float64)
    t_x = math.fsum(ratio)
    # sum_{n<=x-1} T(n) = sum_{j<=x-1} (x - j) * ratio_j
    t_sum = math.fsum((x - n[:-1]) * ratio[:-1])
    left = int(col.sum(dtype=object))
    right = m.term(x) * t_x - m.q * t_sum
    return left, right


def abel_identity_check(m: RaceModulus, x: int, rel_tol: float = 1e-9) -> bool:
    left, right = abel_identity_sides(m, x)
    return math.isclose(left, right, rel_tol=rel_tol, abs_tol=0.0)


def decomposition_identity_check(m: RaceModulus, x: int) -> bool:
    """sum_{n<=x} sigma(a_n)/a_n == sum_{d<=a_x} #{n<=x : d | a_n} / d, exactly."""
    col = _sigma_column(m, x).tolist()
    left = sum(Fraction(s, m.term(n)) for n, s in enumerate(col, start=1))
    right = sum(
        Fraction(c, d)
        for d in range(1, m.term(x) + 1)
        if (c := progression_count(m, d, x))
    )
    return left == right


def harmonic_bound(limit: int) -> Tuple[float, float]:
    """(H_M, ln M + 1) for M = limit."""
    h = math.fsum(1.0 / np.arange(1, limit + 1, dtype=np.float64))
    return h, math.log(limit) + 1


@dataclass(frozen=True)
class TheoremCertificate:
    """Exhaustive race outcome. min_margin = min_{K<=K_max} D_k(K), reached first at argmin_k."""

    modulus: RaceModulus
    k_max: int
    verified: bool
    min_margin: int
    argmin_k: int
    elapsed_ms: int


def _block_race(args):
    (n0, n1), q, residues = args
    mat = progression_matrix("sigma", q, n0, n1)
    base = mat[:, 0]
    _check_block(base)
    out = {}
    for k in residues:
        diff = base - mat[:, k]
        cs = np.cumsum(diff)
        i = int(np.argmin(cs))
        out[k] = (int(cs[-1]), int(cs[i]), n0 + i)
    return out


def run_races(
    residues: Sequence[int] = PAPER_RESIDUES,
    k_max: int = 10**6,
    segment_len: int = DEFAULT_SEGMENT_LEN,
    q: int = PAPER_MODULUS,
) -> List[TheoremCertificate]:
    """Track D_k(K) = sum_{n<=K} [sigma(q n) - sigma(q n + k)] for every K <= k_max.

    All residues share one sieve pass; each certificate carries the shared
    wall time.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    residues = [int(k) for k in residues]
    for k in residues:
        if not 0 < k < q:
            raise ValueError(f"race residue must satisfy 0 < k < {q}, got {k}")
    start = time.perf_counter()
    offset = {k: 0 for k in residues}
    best: Dict[int, Tuple[Optional[int], int]] = {k: (None, 0) for k in residues}
    jobs = [(b, q, tuple(residues)) for b in progression_blocks(q, k_max, segment_len)]
    for chunk in ordered_map(_block_race, jobs):
        for k in residues:
            total, low, at = chunk[k]
            cand = offset[k] + low
            if best[k][0] is None or cand < best[k][0]:
                best[k] = (cand, at)
            offset[k] = _check_i128(offset[k] + total)
    elapsed = int((time.perf_counter() - start) * 1000)
    return [
        TheoremCertificate(RaceModulus(q, k), k_max, best[k][0] > 0, best[k][0], best[k][1], elapsed)
        for k in residues
    ]


def run_race(
    k: int,
    k_max: int = 10**6,
    segment_len: int = DEFAULT_SEGMENT_LEN,
    q: int = PAPER_MODULUS,
) -> TheoremCertificate:
    return run_races([k], k_max, segment_len, q)[0]


class Direction(str, enum.Enum):
    """Which strict inequality a pointwise scan expects to hold."""

    BASE_GREATER = "base_greater"  # f(q n) > f(q n + k)
    OFFSET_GREATER = "offset_greater"  # f(q n + k) > f(q n)


@dataclass(frozen=True)
class PointwiseScanReport:
    function_id: str
    q: int
    k: int
    direction: Direction
    limit: int
    violation_count: int
    first_violation: Optional[int]
    violations: Tuple[int, ...] = field(default=())


def _block_scan(args):
    (n0, n1), function, q, k, direction = args
    mat = progression_matrix(function, q, n0, n1)
    base, off = mat[:, 0], mat[:, k]
    ok = base > off if direction is Direction.BASE_GREATER else off > base
    return n0 + np.flatnonzero(~ok)


def pointwise_scan(
    function_id: str,
    k: int,
    direction: Direction | str,
    limit: int,
    segment_len: int = DEFAULT_SEGMENT_LEN,
    q: int = PAPER_MODULUS,
    max_recorded: Optional[int] = None,
) -> PointwiseScanReport:
    """Record every n <= limit at which the expected strict inequality fails.

    Ties count as violations. ``violations`` keeps the first ``max_recorded``
    (all when None); ``violation_count`` is always the full count.
    """
    if function_id not in ("sigma", "phi"):
        raise ValueError(f"unknown function {function_id!r}")
    if limit < 1:
        raise ValueError("limit must be >= 1")
    if not 0 < k < q:
        raise ValueError(f"residue must satisfy 0 < k < {q}")
    direction = Direction(direction)
    recorded: List[int] = []
    count, first = 0, None
    jobs = [(b, function_id, q, k, direction) for b in progression_blocks(q, limit, segment_len)]
    for bad in ordered_map(_block_scan, jobs):
        if not bad.size:
            continue
        if first is None:
            first = int(bad[0])
        count += int(bad.size)
        room = bad.size if max_recorded is None else max(0, max_recorded - len(recorded))
        recorded.extend(int(v) for v in bad[:room])
    return PointwiseScanReport(function_id, q, k, direction, limit, count, first, tuple(recorded))
