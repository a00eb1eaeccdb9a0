"""Exact arithmetic functions on 64-bit integers.

Factorization (smallest-prime-factor table, trial division, Pollard rho),
deterministic Miller-Rabin, and the multiplicative functions sigma and phi
evaluated from a factorization.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import ArithmeticOverflowError, DomainError

U64_MAX = (1 << 64) - 1

# Deterministic for every n < 3.3e24, in particular all of u64.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_TRIAL_LIMIT = 1 << 12


def check_u64(value: int, what: str = "value") -> int:
    if value < 0 or value > U64_MAX:
        raise ArithmeticOverflowError(f"{what} = {value} does not fit in 64 bits")
    return value


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all n < 2**64."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FactoredInteger:
    """A positive integer together with its canonical prime factorization.

    ``factors`` is a tuple of ``(prime, exponent)`` pairs with strictly
    increasing primes. Construction checks the product and ordering;
    :meth:`is_valid` additionally runs a primality check on every prime.
    """

    value: int
    factors: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.value < 1:
            raise DomainError("FactoredInteger value must be >= 1")
        check_u64(self.value)
        prod, last = 1, 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"malformed factorization {self.factors!r}")
            prod *= p**e
            last = p
        if prod != self.value:
            raise ValueError(f"factors {self.factors!r} do not multiply to {self.value}")

    def is_valid(self) -> bool:
        return all(is_prime(p) for p, _ in self.factors)

    @property
    def primes(self) -> Tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def __int__(self) -> int:
        return self.value


@dataclass(frozen=True, eq=False)
class SpfTable:
    """Smallest prime factor of every n in [2, limit]; spf[0] = spf[1] = 0."""

    limit: int
    spf: np.ndarray

    def __getitem__(self, n: int) -> int:
        return int(self.spf[n])


def build_spf(limit: int) -> SpfTable:
    if limit < 1:
        raise DomainError("SPF limit must be >= 1")
    dtype = np.int32 if limit < 2**31 else np.int64
    spf = np.zeros(limit + 1, dtype=dtype)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            sl = spf[p * p :: p]
            sl[sl == 0] = p
    idx = np.flatnonzero(spf == 0)
    spf[idx] = idx
    spf[:2] = 0
    spf.flags.writeable = False
    return SpfTable(limit, spf)


def _pollard_brent(n: int) -> int:
    """Return a nontrivial factor of the odd composite n."""
    rng = random.Random(n)
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def _split_large(n: int, out: dict) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    d = _pollard_brent(n)
    _split_large(d, out)
    _split_large(n // d, out)


def factorize(n: int, spf: Optional[SpfTable] = None) -> FactoredInteger:
    """Canonical factorization of ``1 <= n < 2**64``.

    Uses the SPF table when given; otherwise trial division by small
    divisors, handing any cofactor without small factors to Pollard rho.
    """
    if n < 1:
        raise DomainError(f"cannot factorize {n}")
    check_u64(n, "n")
    counts: dict = {}
    if spf is not None:
        if n > spf.limit:
            raise DomainError(f"n = {n} exceeds SPF table limit {spf.limit}")
        m = n
        table = spf.spf
        while m > 1:
            p = int(table[m])
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            counts[p] = e
    else:
        m = n
        for p in (2, 3):
            if m % p == 0:
                e = 0
                while m % p == 0:
                    m //= p
                    e += 1
                counts[p] = e
        p, step = 5, 2
        while p <= _TRIAL_LIMIT and p * p <= m:
            if m % p == 0:
                e = 0
                while m % p == 0:
                    m //= p
                    e += 1
                counts[p] = e
            p += step
            step = 6 - step
        if m > 1:
            if p * p > m:
                counts[m] = counts.get(m, 0) + 1
            else:
                _split_large(m, counts)
    return FactoredInteger(n, tuple(sorted(counts.items())))


def _as_factored(f) -> FactoredInteger:
    return f if isinstance(f, FactoredInteger) else factorize(int(f))


def sigma(f) -> int:
    """Sum of divisors, prod (p^(e+1) - 1)/(p - 1). Accepts an int or a FactoredInteger."""
    f = _as_factored(f)
    out = 1
    for p, e in f.factors:
        out *= (p ** (e + 1) - 1) // (p - 1)
    return check_u64(out, f"sigma({f.value})")


def phi(f) -> int:
    """Euler totient, prod p^(e-1)(p - 1)."""
    f = _as_factored(f)
    out = 1
    for p, e in f.factors:
        out *= p ** (e - 1) * (p - 1)
    return out


def sigma_bruteforce(n: int) -> int:
    """Divisor sum by direct trial division; test oracle only."""
    total = 0
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            total += d
            if d * d != n:
                total += n // d
    return total


def phi_bruteforce(n: int) -> int:
    return sum(1 for a in range(1, n + 1) if math.gcd(a, n) == 1)
