"""Executable acceptance criteria, shared by ``sigma-race selftest`` and pytest.

Each criterion returns a :class:`CriterionResult`; a criterion passes only
if its check holds and it finishes inside its time budget.
"""
from __future__ import annotations

import math
import random
import statistics
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .arith import build_spf, factorize, phi, sigma
from .congruence import (
    PAPER_RESIDUES,
    beta_closed,
    beta_series,
    count_solutions,
    count_solutions_bruteforce,
    paper_moduli,
)
from .race import (
    Direction,
    abel_identity_check,
    check_envelopes_many,
    check_weighted_bounds,
    decomposition_identity_check,
    harmonic_bound,
    log_grid,
    pointwise_scan,
    run_races,
)
from .sieve import sieve_phi_segment, sieve_sigma_segment


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float
    budget_s: Optional[float]

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        budget = f"/{self.budget_s:g}s" if self.budget_s is not None else ""
        return f"[{mark}] {self.number:2d}. {self.title} ({self.seconds:.3f}s{budget}) {self.detail}"

    def to_dict(self) -> Dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "passed": self.passed,
            "detail": self.detail,
            "seconds": round(self.seconds, 3),
            "budget_s": self.budget_s,
        }


def _exact_constants() -> Tuple[bool, str]:
    expected = {0: Fraction(319, 1080), **{k: Fraction(8, 75) for k in PAPER_RESIDUES}}
    ok, worst = True, 0.0
    for m in paper_moduli():
        times = []
        for _ in range(5):
            t = time.perf_counter()
            c = beta_closed(m)
            times.append(time.perf_counter() - t)
        ok &= c.coefficient == expected[m.k]
        worst = max(worst, statistics.median(times))
    ok &= worst < 1e-3
    return ok, f"319/1080 and 8/75 exact; slowest median call {worst * 1e6:.0f} us (< 1000 us)"


def _series_convergence() -> Tuple[bool, str]:
    ok, worst = True, 0.0
    for m in paper_moduli():
        s = beta_series(m, 10**6)
        gap = beta_closed(m).numeric - s.partial
        bound = (30 if m.k == 0 else 1) * (1e-6 + 1e-12)
        ok &= math.isclose(s.tail_bound, bound) and 0 <= gap <= s.tail_bound
        worst = max(worst, gap / s.tail_bound)
    return ok, f"max gap/tail_bound = {worst:.3f}"


def _oracle_equivalence() -> Tuple[bool, str]:
    mismatches = 0
    for m in paper_moduli():
        for d in range(1, 10**4 + 1):
            if count_solutions(m, d) != count_solutions_bruteforce(m, d):
                mismatches += 1
    return mismatches == 0, f"{mismatches} mismatches over 9 moduli x d <= 10^4"


def _race(k_max: int) -> Tuple[bool, str]:
    certs = run_races(PAPER_RESIDUES, k_max)
    ok = all(c.verified and c.min_margin > 0 for c in certs)
    low = min(certs, key=lambda c: c.min_margin)
    return ok, f"all 8 residues verified; smallest margin {low.min_margin} (k={low.modulus.k}, K={low.argmin_k})"


def _sigma_scan() -> Tuple[bool, str]:
    r = pointwise_scan("sigma", 1, Direction.BASE_GREATER, 10**7, max_recorded=20)
    return r.violation_count == 0, f"{r.violation_count} violations of sigma(30n) > sigma(30n+1), n <= 10^7"


def _phi_scan() -> Tuple[bool, str]:
    r = pointwise_scan("phi", 1, Direction.OFFSET_GREATER, 10**5, max_recorded=20)
    return r.violation_count == 0, f"{r.violation_count} violations of phi(30n+1) > phi(30n), n <= 10^5"


def _envelopes() -> Tuple[bool, str]:
    reports = check_envelopes_many(paper_moduli(), log_grid(64, 10**3, 10**6))
    slack = min(r.worst_slack for r in reports)
    n = sum(len(r.samples) for r in reports)
    return all(r.all_pass for r in reports), f"{n} samples; worst slack {slack:.3f}"


def _bounds() -> Tuple[bool, str]:
    rep = check_weighted_bounds(log_grid(64, 10**3, 10**6))
    gap = min(r.crossover_gap for r in rep.rows)
    return rep.all_pass, f"{len(rep.rows)} rows; smallest crossover gap {gap:.6g}"


def identity_suite(seed: int = 20261014) -> Tuple[bool, str]:
    rng = random.Random(seed)
    failures: List[str] = []

    abel_x = sorted({1, 2, 3, 10, 999, 1000, 10**4, *rng.sample(range(1, 10**4), 12)})
    for m in paper_moduli():
        bad = [x for x in abel_x if not abel_identity_check(m, x)]
        if bad:
            failures.append(f"abel {m.k}: {bad}")

    decomp_x = sorted({1, 2, 7, 50, 200, *rng.sample(range(1, 201), 4)})
    for m in paper_moduli():
        bad = [x for x in decomp_x if not decomposition_identity_check(m, x)]
        if bad:
            failures.append(f"decomposition {m.k}: {bad}")

    n_max = 10**5
    spf = build_spf(n_max)
    sig = sieve_sigma_segment(1, n_max + 1).values
    sig_h = sieve_sigma_segment(1, n_max + 1, method="harmonic").values
    tot = sieve_phi_segment(1, n_max + 1).values
    direct_s = np.array([sigma(factorize(n, spf)) for n in range(1, n_max + 1)])
    direct_p = np.array([phi(factorize(n, spf)) for n in range(1, n_max + 1)])
    if not (np.array_equal(sig, direct_s) and np.array_equal(sig_h, direct_s) and np.array_equal(tot, direct_p)):
        failures.append("sieve vs factorization")

    # Multiplicativity over every coprime pair a <= b with a*b <= n_max.
    for a in range(2, math.isqrt(n_max) + 1):
        b = np.arange(a, n_max // a + 1)
        b = b[np.gcd(b, a) == 1]
        ab = a * b - 1
        if not (np.array_equal(sig[ab], sig[a - 1] * sig[b - 1]) and np.array_equal(tot[ab], tot[a - 1] * tot[b - 1])):
            failures.append(f"multiplicativity a={a}")
            break

    for limit in (10**3, 10**4, 10**5, 10**6):
        h, bound = harmonic_bound(limit)
        if not h < bound:
            failures.append(f"harmonic M={limit}")

    detail = "abel, decomposition, multiplicativity, sieve, harmonic all hold" if not failures else "; ".join(failures)
    return not failures, detail


CRITERIA: List[Tuple[int, str, Callable[[], Tuple[bool, str]], Optional[float]]] = [
    (1, "exact Euler-product constants", _exact_constants, None),
    (2, "truncated series within tail bound (D = 10^6)", _series_convergence, 5.0),
    (3, "closed-form B(d) equals brute force (d <= 10^4)", _oracle_equivalence, 10.0),
    (4, "race verified, K_max = 999", lambda: _race(999), 1.0),
    (5, "race verified, K_max = 10^6", lambda: _race(10**6), 60.0),
    (6, "pointwise sigma scan, n <= 10^7", _sigma_scan, 600.0),
    (7, "pointwise phi scan, n <= 10^5", _phi_scan, 5.0),
    (8, "residual envelopes on 64-point grid", _envelopes, 120.0),
    (9, "quadratic bounds and crossover on 64-point grid", _bounds, 120.0),
    (10, "identity suite", identity_suite, None),
]


def run_criterion(number: int) -> CriterionResult:
    for num, title, fn, budget in CRITERIA:
        if num == number:
            start = time.perf_counter()
            ok, detail = fn()
            elapsed = time.perf_counter() - start
            if budget is not None and elapsed >= budget:
                ok = False
                detail += f"; over time budget {budget:g}s"
            return CriterionResult(num, title, ok, detail, elapsed, budget)
    raise KeyError(f"no acceptance criterion {number}")


def run_all(numbers: Optional[Sequence[int]] = None, echo: Optional[Callable[[str], None]] = None) -> List[CriterionResult]:
    numbers = [c[0] for c in CRITERIA] if numbers is None else list(numbers)
    results = []
    for n in numbers:
        r = run_criterion(n)
        if echo:
            echo(r.line())
        results.append(r)
    return results
