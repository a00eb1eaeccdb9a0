import pytest

from sigma_race.arith import build_spf


@pytest.fixture(scope="session")
def spf_1e5():
    return build_spf(10**5)
