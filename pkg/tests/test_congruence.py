import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sigma_race.congruence import (
    PAPER_RESIDUES,
    PI_SQUARED,
    RaceModulus,
    beta_closed,
    beta_series,
    coprime_residues,
    count_solutions,
    count_solutions_bruteforce,
    paper_moduli,
)
from sigma_race.errors import DomainError

MODULI = paper_moduli()


@pytest.mark.parametrize(
    "q, k, d, expected",
    [(30, 0, 4, 2), (30, 1, 2, 0), (30, 0, 8, 2), (30, 7, 1, 1)],
)
def test_count_solutions_examples(q, k, d, expected):
    m = RaceModulus(q, k)
    assert count_solutions(m, d) == expected
    assert count_solutions_bruteforce(m, d) == expected


@pytest.mark.parametrize("q, k, d, expected", [(30, 1, 7, 1), (30, 0, 30, 30), (30, 11, 1, 1)])
def test_bruteforce_examples(q, k, d, expected):
    assert count_solutions_bruteforce(RaceModulus(q, k), d) == expected


def test_prime_power_cases():
    for m in MODULI:
        for p in (2, 3, 5):
            for a in range(1, 6):
                assert count_solutions(m, p**a) == (p if m.k == 0 else 0)
        for p in (7, 11, 13, 31, 97):
            for a in range(1, 4):
                assert count_solutions(m, p**a) == 1


def test_zero_divisor_rejected():
    with pytest.raises(DomainError):
        count_solutions(RaceModulus(30, 1), 0)
    with pytest.raises(DomainError):
        RaceModulus(0, 0)


def test_residue_reduced_mod_q():
    assert RaceModulus(30, 31).k == 1
    assert coprime_residues(30) == PAPER_RESIDUES


@pytest.mark.parametrize("m", MODULI, ids=lambda m: f"k{m.k}")
def test_closed_form_matches_oracle(m):
    for d in range(1, 3001):
        c = count_solutions(m, d)
        assert c == count_solutions_bruteforce(m, d)
        assert c <= (30 if m.k == 0 else 1)


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(MODULI), st.integers(1, 1000), st.integers(1, 1000))
def test_count_multiplicative(m, d1, d2):
    if math.gcd(d1, d2) != 1:
        return
    assert count_solutions(m, d1 * d2) == count_solutions(m, d1) * count_solutions(m, d2)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 60), st.integers(0, 59), st.integers(1, 500))
def test_generalized_moduli_match_oracle(q, k, d):
    m = RaceModulus(q, k)
    assert count_solutions(m, d) == count_solutions_bruteforce(m, d)


def test_beta_closed_examples():
    assert beta_closed(RaceModulus(30, 0)).coefficient == Fraction(319, 1080)
    for k in PAPER_RESIDUES:
        assert beta_closed(RaceModulus(30, k)).coefficient == Fraction(8, 75)
    assert beta_closed(RaceModulus(1, 0)).coefficient == Fraction(1, 6)


def test_beta_local_factors_for_30():
    # The k = 0 product is the three local factors 5/3, 11/8, 29/24 times prod_{p not | 30}.
    zeta2_without_235 = Fraction(1, 6) * Fraction(3, 4) * Fraction(8, 9) * Fraction(24, 25)
    expected = Fraction(5, 3) * Fraction(11, 8) * Fraction(29, 24) * zeta2_without_235
    assert beta_closed(RaceModulus(30, 0)).coefficient == expected


def test_beta_numeric_precision():
    for m in MODULI:
        c = beta_closed(m)
        assert math.isclose(c.numeric, float(c.coefficient) * math.pi**2, rel_tol=1e-13)
    assert math.isclose(PI_SQUARED, math.pi**2, rel_tol=1e-16)


@pytest.mark.parametrize("q, k", [(12, 0), (12, 4), (12, 6), (8, 0), (8, 4), (45, 9), (7, 0)])
def test_beta_closed_generalized_against_series(q, k):
    m = RaceModulus(q, k)
    s = beta_series(m, 2 * 10**5)
    closed = beta_closed(m).numeric
    assert 0 <= closed - s.partial <= s.tail_bound


def test_beta_series_examples():
    assert beta_series(RaceModulus(30, 0), 1).partial == 1.0
    s0 = beta_series(RaceModulus(30, 0), 10**6)
    assert abs(s0.partial - beta_closed(RaceModulus(30, 0)).numeric) <= 3.1e-5
    assert s0.tail_bound == pytest.approx(30 * (1e-6 + 1e-12))
    s7 = beta_series(RaceModulus(30, 7), 10**6)
    assert abs(s7.partial - 8 * math.pi**2 / 75) <= 1.1e-6


@pytest.mark.parametrize("m", [RaceModulus(30, 0), RaceModulus(30, 13)], ids=["k0", "k13"])
def test_series_monotone_and_bounded(m):
    closed = beta_closed(m).numeric
    prev = 0.0
    for depth in (1, 2, 5, 10, 100, 1000, 10**4, 10**5):
        s = beta_series(m, depth)
        assert prev <= s.partial <= closed
        assert s.partial + s.tail_bound >= closed
        assert s.tail_bound <= m.q * (1 / depth + 1 / depth**2)
        prev = s.partial
