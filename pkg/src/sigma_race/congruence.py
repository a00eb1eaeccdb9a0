"""Solution counts of q*m + k = 0 (mod d) and the density constants they define.

For a progression q*m + k the count B(d) of residues m mod d solving the
congruence is gcd(q, d) when that gcd divides k and 0 otherwise. B is
multiplicative in d, so beta = sum_d B(d)/d^2 factors as an Euler
product. Primes not dividing q have B(p^a) = 1 and contribute
(1 - p^-2)^-1, which collects into zeta(2) = pi^2/6; the finitely many
primes dividing q contribute rational local factors. Hence beta is an
exact rational multiple of pi^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

import numpy as np

from .arith import factorize
from .errors import ArithmeticOverflowError, DomainError

PI_SQUARED = 9.86960440108935861883449099987615
PAPER_MODULUS = 30
PAPER_RESIDUES: Tuple[int, ...] = (1, 7, 11, 13, 17, 19, 23, 29)
_I128_MAX = (1 << 127) - 1


def coprime_residues(q: int) -> Tuple[int, ...]:
    return tuple(k for k in range(1, q) if math.gcd(k, q) == 1) if q > 1 else (0,)


@dataclass(frozen=True)
class RaceModulus:
    """The progression q*m + k; k is reduced mod q on construction."""

    q: int = PAPER_MODULUS
    k: int = 0

    def __post_init__(self):
        if self.q < 1:
            raise DomainError("modulus q must be >= 1")
        if self.k < 0:
            raise DomainError("residue k must be >= 0")
        object.__setattr__(self, "k", self.k % self.q)

    def term(self, m: int) -> int:
        return self.q * m + self.k

    @property
    def max_count(self) -> int:
        """Largest value of B(d) over all d: gcd(q, k), or q when k = 0."""
        return math.gcd(self.q, self.k)


def paper_moduli() -> Tuple[RaceModulus, ...]:
    """k = 0 and the eight residues coprime to 30."""
    return (RaceModulus(30, 0),) + tuple(RaceModulus(30, k) for k in PAPER_RESIDUES)


def count_solutions(m: RaceModulus, d: int) -> int:
    if d < 1:
        raise DomainError("d must be >= 1")
    g = math.gcd(m.q, d)
    return g if m.k % g == 0 else 0


def count_solutions_bruteforce(m: RaceModulus, d: int) -> int:
    """Enumerate every residue x mod d and count q*x + k = 0 (mod d)."""
    if d < 1:
        raise DomainError("d must be >= 1")
    x = np.arange(d, dtype=np.int64)
    return int(np.count_nonzero((m.q * x + m.k) % d == 0))


@dataclass(frozen=True)
class EulerConstant:
    """beta = coefficient * pi^2, with coefficient an exact rational."""

    coefficient: Fraction
    numeric: float

    @property
    def numerator(self) -> int:
        return self.coefficient.numerator

    @property
    def denominator(self) -> int:
        return self.coefficient.denominator


def _check_i128(x: Fraction) -> Fraction:
    if abs(x.numerator) > _I128_MAX or x.denominator > _I128_MAX:
        raise ArithmeticOverflowError(f"rational {x} exceeds 128-bit range")
    return x


def _valuation(n: int, p: int) -> int:
    if n == 0:
        return math.inf  # type: ignore[return-value]
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def local_factor(m: RaceModulus, p: int, e: int) -> Fraction:
    """sum_{a>=0} B(p^a) / p^(2a) for a prime p with p^e exactly dividing q."""
    vk = _valuation(m.k, p)
    total = Fraction(1)
    for a in range(1, e + 1):
        if a > vk:
            return _check_i128(total)
        # B(p^a) = p^a, so the term is p^a / p^(2a).
        total = _check_i128(total + Fraction(1, p**a))
    if e <= vk:
        # a > e: B(p^a) = p^e; geometric tail p^e * p^(-2(e+1)) / (1 - p^-2).
        tail = Fraction(p**e, p ** (2 * (e + 1))) / (1 - Fraction(1, p * p))
        total = _check_i128(total + tail)
    return total


def beta_closed(m: RaceModulus) -> EulerConstant:
    """Exact beta(q, k) = c * pi^2 from the Euler product."""
    if m.q > 10**6:
        raise DomainError("beta_closed supports q <= 10**6")
    coef = Fraction(1, 6)
    for p, e in factorize(m.q).factors:
        # Swap the generic factor (1 - p^-2)^-1 already inside zeta(2) for the local one.
        coef = _check_i128(coef * local_factor(m, p, e) * (1 - Fraction(1, p * p)))
    return EulerConstant(coef, float(coef) * PI_SQUARED)


@dataclass(frozen=True)
class SeriesTruncation:
    """Partial sum of beta's defining series up to depth D, with a tail bound."""

    modulus: RaceModulus
    depth: int
    partial: float
    tail_bound: float


def beta_series(m: RaceModulus, depth: int) -> SeriesTruncation:
    """sum_{d<=D} B(d)/d^2 via exactly rounded summation, plus a bound on the rest.

    The tail uses B(d) <= max_count and sum_{d>D} 1/d^2 <= 1/D + 1/D^2.
    """
    if depth < 1:
        raise DomainError("series depth must be >= 1")
    d = np.arange(1, depth + 1, dtype=np.int64)
    g = np.gcd(d, m.q)
    counts = np.where(m.k % g == 0, g, 0).astype(np.float64)
    df = d.astype(np.float64)
    partial = math.fsum(counts / (df * df))
    tail = m.max_count * (1.0 / depth + 1.0 / (depth * depth))
    return SeriesTruncation(m, depth, partial, tail)


@dataclass(frozen=True)
class BetaReport:
    """Closed form and truncated series for one modulus, side by side."""

    modulus: RaceModulus
    constant: EulerConstant
    series: SeriesTruncation

    @property
    def within_tail(self) -> bool:
        gap = self.constant.numeric - self.series.partial
        # Rounding of the pi^2 product is ~1e-16; allow that much below zero.
        return -1e-12 <= gap <= self.series.tail_bound


def beta_report(m: RaceModulus, depth: int = 10**6) -> BetaReport:
    return BetaReport(m, beta_closed(m), beta_series(m, depth))
