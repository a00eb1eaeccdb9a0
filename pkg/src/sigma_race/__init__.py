"""Divisor-sum races between the progressions 30n and 30n + k."""
from .arith import FactoredInteger, SpfTable, build_spf, factorize, is_prime, phi, sigma
from .congruence import (
    BetaReport,
    EulerConstant,
    RaceModulus,
    SeriesTruncation,
    beta_closed,
    beta_series,
    count_solutions,
    count_solutions_bruteforce,
)
from .errors import ArithmeticOverflowError, DomainError, SieveCapacityError
from .race import (
    Direction,
    EnvelopeReport,
    PointwiseScanReport,
    ResidualSample,
    TheoremCertificate,
    WeightedBoundReport,
    abel_identity_check,
    check_envelopes,
    check_weighted_bounds,
    normalized_sum,
    pointwise_scan,
    progression_count,
    run_race,
    run_races,
)
from .sieve import DivisorSumTable, TotientTable, sieve_phi_segment, sieve_sigma_segment

__version__ = "0.1.0"
