import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sigma_race.arith import factorize, is_prime, phi, sigma
from sigma_race.errors import SieveCapacityError
from sigma_race.sieve import (
    DivisorSumTable,
    concat_tables,
    ordered_map,
    progression_matrix,
    segment_bounds,
    sieve_phi_segment,
    sieve_sigma_segment,
    worker_count,
)


@pytest.mark.parametrize("method", ["multiplicative", "harmonic"])
def test_sigma_segment_examples(method):
    assert sieve_sigma_segment(1, 6, method).values.tolist() == [1, 3, 4, 7, 6]
    assert sieve_sigma_segment(30, 32, method).values.tolist() == [72, 32]


def test_phi_segment_small():
    assert sieve_phi_segment(1, 11).values.tolist() == [1, 1, 2, 2, 4, 2, 6, 4, 6, 4]


def test_whole_range_against_factorization(spf_1e5):
    n = 10**5
    sig = sieve_sigma_segment(1, n + 1)
    tot = sieve_phi_segment(1, n + 1)
    assert sig.values[0] == 1
    for v in range(1, n + 1):
        f = factorize(v, spf_1e5)
        assert sig[v] == sigma(f)
        assert tot[v] == phi(f)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10**11), st.integers(1, 3000))
def test_segment_matches_factorization(lo, length):
    hi = lo + length
    fast = sieve_sigma_segment(lo, hi)
    slow = sieve_sigma_segment(lo, hi, method="harmonic")
    assert fast == slow
    tot = sieve_phi_segment(lo, hi)
    for n in range(lo, hi, max(1, length // 25)):
        assert fast[n] == sigma(n)
        assert tot[n] == phi(n)


def test_table_lower_bound_and_primes():
    t = sieve_sigma_segment(1, 5000)
    for n in range(1, 5000):
        s = t[n]
        assert s >= n + (1 if n > 1 else 0)
        assert (s == n + 1) == is_prime(n)


def test_partition_consistency():
    whole = sieve_sigma_segment(1, 10**6 + 1)
    rng = np.random.default_rng(7)
    cuts = np.sort(rng.choice(np.arange(2, 10**6), size=40, replace=False)).tolist()
    edges = [1, *cuts, 10**6 + 1]
    parts = [sieve_sigma_segment(a, b) for a, b in zip(edges, edges[1:])]
    assert concat_tables(parts) == whole
    parts = [sieve_sigma_segment(a, b) for a, b in segment_bounds(1, 10**6 + 1, 1 << 17)]
    assert concat_tables(parts) == whole


def test_tables_are_read_only():
    t = sieve_sigma_segment(1, 10)
    with pytest.raises(ValueError):
        t.values[0] = 5


@pytest.mark.parametrize("lo, hi", [(0, 5), (5, 5), (10, 3)])
def test_bad_bounds(lo, hi):
    with pytest.raises(SieveCapacityError):
        sieve_sigma_segment(lo, hi)


def test_capacity_exceeded():
    with pytest.raises(SieveCapacityError):
        sieve_sigma_segment(1, 1002, capacity=1000)
    with pytest.raises(SieveCapacityError):
        sieve_phi_segment(1, 1002, capacity=1000)


def test_progression_matrix_columns():
    mat = progression_matrix("sigma", 30, 1, 4)
    assert mat[:, 0].tolist() == [72, 168, sigma(90)]
    assert mat[:, 1].tolist() == [32, 62, sigma(91)]


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("SIGMA_RACE_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("SIGMA_RACE_THREADS", "0")
    with pytest.raises(ValueError):
        worker_count()


def test_ordered_map_threads_preserve_order():
    items = list(range(50))
    assert list(ordered_map(lambda x: x * x, items, workers=4)) == [x * x for x in items]


def test_divisor_sum_table_shape_checked():
    with pytest.raises(ValueError):
        DivisorSumTable(1, 4, np.array([1, 3], dtype=np.int64))
