"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function (e.g. n = 0)."""


class ArithmeticOverflowError(OverflowError):
    """A checked integer result does not fit its declared width."""


class SieveCapacityError(ValueError):
    """A sieve request exceeds the configured segment capacity or range."""
