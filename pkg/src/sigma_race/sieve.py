"""Segmented sieves for sigma and phi over contiguous integer ranges.

Two independent strategies are provided for sigma:

* ``"multiplicative"`` (default): for each base prime p <= sqrt(hi) the exact
  p-power part of every multiple in the segment is built with strided slices;
  the leftover cofactor is 1 or a single large prime.
* ``"harmonic"``: for each d <= sqrt(hi) add the divisor pair (d, n/d) to
  every multiple n of d. Slower to reason about performance-wise, trivially
  correct, and used as the baseline the fast path is checked against.

All tables are int64 numpy arrays marked read-only after construction.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Iterator, List, Sequence, Tuple, TypeVar

import numpy as np

from .errors import SieveCapacityError

DEFAULT_SEGMENT_LEN = 1 << 20
SEGMENT_CAPACITY = 1 << 26
# sigma(n) < 8n for all n below this bound, so int64 products cannot overflow.
MAX_ARGUMENT = 1 << 50
THREADS_ENV = "SIGMA_RACE_THREADS"

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True, eq=False)
class SegmentTable:
    """Values f(n) for lo <= n < hi, stored at index n - lo."""

    lo: int
    hi: int
    values: np.ndarray

    def __post_init__(self):
        if self.lo < 1 or self.hi <= self.lo:
            raise ValueError(f"bad segment [{self.lo}, {self.hi})")
        if self.values.shape != (self.hi - self.lo,):
            raise ValueError("values length must equal hi - lo")
        self.values.flags.writeable = False

    def __len__(self) -> int:
        return self.hi - self.lo

    def __getitem__(self, n: int) -> int:
        if not self.lo <= n < self.hi:
            raise IndexError(n)
        return int(self.values[n - self.lo])

    def __eq__(self, other) -> bool:
        return (
            type(self) is type(other)
            and (self.lo, self.hi) == (other.lo, other.hi)
            and np.array_equal(self.values, other.values)
        )


class DivisorSumTable(SegmentTable):
    """sigma(n) over a segment."""


class TotientTable(SegmentTable):
    """phi(n) over a segment."""


@lru_cache(maxsize=8)
def _primes_upto(limit: int) -> np.ndarray:
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    out = np.flatnonzero(sieve).astype(np.int64)
    out.flags.writeable = False
    return out


def base_primes(hi: int) -> np.ndarray:
    """All primes p with p*p < hi (enough to sieve [lo, hi))."""
    r = math.isqrt(max(hi - 1, 1))
    # Round the cache key up so neighbouring segments share one prime list.
    key = 1 << max(r, 1).bit_length()
    primes = _primes_upto(key)
    return primes[: np.searchsorted(primes, r, side="right")]


def _check_bounds(lo: int, hi: int, capacity: int) -> None:
    if lo < 1 or hi <= lo:
        raise SieveCapacityError(f"segment [{lo}, {hi}) must satisfy 1 <= lo < hi")
    if hi - lo > capacity:
        raise SieveCapacityError(f"segment length {hi - lo} exceeds capacity {capacity}")
    if hi > MAX_ARGUMENT:
        raise SieveCapacityError(f"segment end {hi} exceeds supported range {MAX_ARGUMENT}")


def _prime_power_parts(lo: int, hi: int) -> Iterator[Tuple[int, int, np.ndarray]]:
    """Yield (p, start, pk) for each base prime, where pk[j] = p^v_p(lo+start+j*p)."""
    n = hi - lo
    for p in base_primes(hi).tolist():
        start = (-lo) % p
        if start >= n:
            continue
        pk = np.full((n - 1 - start) // p + 1, p, dtype=np.int64)
        power, step = p * p, p
        while power < hi:
            s = (-lo) % power
            if s >= n:
                break
            pk[(s - start) // p :: step] *= p
            power *= p
            step *= p
        yield p, start, pk


def _sigma_multiplicative(lo: int, hi: int) -> np.ndarray:
    rem = np.arange(lo, hi, dtype=np.int64)
    out = np.ones(hi - lo, dtype=np.int64)
    for p, start, pk in _prime_power_parts(lo, hi):
        rem[start::p] //= pk
        out[start::p] *= (pk * p - 1) // (p - 1)
    big = rem > 1
    out[big] *= rem[big] + 1
    return out


def _sigma_harmonic(lo: int, hi: int) -> np.ndarray:
    out = np.zeros(hi - lo, dtype=np.int64)
    for d in range(1, math.isqrt(hi - 1) + 1):
        first = max(d * d, -(-lo // d) * d)
        if first >= hi:
            continue
        cofactors = np.arange(first // d, (hi - 1) // d + 1, dtype=np.int64)
        pair = cofactors + d
        if first == d * d:
            pair[0] = d
        out[first - lo :: d] += pair
    return out


def sieve_sigma_segment(
    lo: int,
    hi: int,
    method: str = "multiplicative",
    capacity: int = SEGMENT_CAPACITY,
) -> DivisorSumTable:
    """sigma(n) for every n in [lo, hi)."""
    _check_bounds(lo, hi, capacity)
    if method == "multiplicative":
        values = _sigma_multiplicative(lo, hi)
    elif method == "harmonic":
        values = _sigma_harmonic(lo, hi)
    else:
        raise ValueError(f"unknown sieve method {method!r}")
    return DivisorSumTable(lo, hi, values)


def sieve_phi_segment(lo: int, hi: int, capacity: int = SEGMENT_CAPACITY) -> TotientTable:
    """phi(n) for every n in [lo, hi)."""
    _check_bounds(lo, hi, capacity)
    rem = np.arange(lo, hi, dtype=np.int64)
    out = np.ones(hi - lo, dtype=np.int64)
    for p, start, pk in _prime_power_parts(lo, hi):
        rem[start::p] //= pk
        out[start::p] *= pk // p * (p - 1)
    big = rem > 1
    out[big] *= rem[big] - 1
    return TotientTable(lo, hi, out)


SIEVES = {
    "sigma": sieve_sigma_segment,
    "phi": sieve_phi_segment,
}


def segment_bounds(lo: int, hi: int, segment_len: int = DEFAULT_SEGMENT_LEN) -> List[Tuple[int, int]]:
    """Partition [lo, hi) into consecutive segments of at most segment_len."""
    if segment_len < 1:
        raise SieveCapacityError("segment_len must be positive")
    return [(a, min(a + segment_len, hi)) for a in range(lo, hi, segment_len)]


def worker_count() -> int:
    """Worker cap from $SIGMA_RACE_THREADS, defaulting to the CPU count."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> Iterator[R]:
    """Map fn over items, possibly in threads, yielding results in input order.

    numpy releases the GIL inside the large array kernels, so threads give
    real speedup on multi-core hosts.
    """
    workers = worker_count() if workers is None else workers
    if workers <= 1:
        yield from map(fn, items)
        return
    items = list(items)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # Bounded look-ahead keeps at most 2*workers segments in flight.
        pending = []
        it = iter(items)
        for item in it:
            pending.append(pool.submit(fn, item))
            if len(pending) >= 2 * workers:
                yield pending.pop(0).result()
        for fut in pending:
            yield fut.result()


def progression_blocks(
    q: int, n_max: int, segment_len: int = DEFAULT_SEGMENT_LEN, n_min: int = 1
) -> List[Tuple[int, int]]:
    """Blocks [n0, n1) of n covering n_min..n_max, sized so q*(n1-n0) <= segment_len."""
    if segment_len < q:
        raise SieveCapacityError(f"segment_len {segment_len} smaller than modulus {q}")
    per = segment_len // q
    return [(a, min(a + per, n_max + 1)) for a in range(n_min, n_max + 1, per)]


def progression_matrix(function: str, q: int, n0: int, n1: int) -> np.ndarray:
    """Matrix M with M[i, k] = f(q*(n0+i) + k) for 0 <= k < q, n0 <= n0+i < n1."""
    table = SIEVES[function](q * n0, q * n1)
    return table.values.reshape(n1 - n0, q)


def concat_tables(tables: Sequence[SegmentTable]) -> SegmentTable:
    """Join adjacent tables of the same kind into one."""
    cls = type(tables[0])
    for a, b in zip(tables, tables[1:]):
        if a.hi != b.lo or type(b) is not cls:
            raise ValueError("tables are not adjacent segments of one kind")
    return cls(tables[0].lo, tables[-1].hi, np.concatenate([t.values for t in tables]))
