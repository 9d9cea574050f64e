import numpy as np
import pytest

from electsim.population import Electorate

A, B, C = 0, 1, 2

# district-by-district (A votes, B votes), three 25-elector profiles
TWO_PARTY_PROFILES = {
    "upper": [(3, 2)] * 5,
    "middle": [(5, 0), (4, 1), (3, 2), (2, 3), (1, 4)],
    "lower": [(5, 0), (5, 0), (2, 3), (2, 3), (1, 4)],
}

# six electors' full rankings over A, B, C
SIX_VOTERS = [
    [A, B, C],
    [A, B, C],
    [A, C, B],
    [B, C, A],
    [B, C, A],
    [C, B, A],
]


def profile_from_counts(counts):
    """Electorate plus valuations in which each elector's favourite party matches the table."""
    district, values = [], []
    for s, (a, b) in enumerate(counts):
        district += [s] * (a + b)
        values += [[1.0, 0.0]] * a + [[0.0, 1.0]] * b
    n = len(district)
    electorate = Electorate(len(counts), np.zeros(n, dtype=int), np.array(district))
    return electorate, np.array(values)


def values_from_rankings(rankings):
    rankings = np.asarray(rankings)
    n, k = rankings.shape
    values = np.empty((n, k))
    values[np.arange(n)[:, None], rankings] = np.arange(k, 0, -1, dtype=float)
    return values


@pytest.fixture
def two_party():
    return {name: profile_from_counts(c) for name, c in TWO_PARTY_PROFILES.items()}


@pytest.fixture
def six_voters():
    rankings = np.array(SIX_VOTERS)
    electorate = Electorate(1, np.zeros(6, dtype=int), np.zeros(6, dtype=int))
    return electorate, rankings, values_from_rankings(rankings)


def small_config(**kw):
    from electsim.config import SweepConfig

    base = dict(n_electors=2000, n_districts=10, n_communities=3, n_parties=3, seed=7)
    base.update(kw)
    return SweepConfig(**base)


# acceptance lines collected by test_acceptance.py and echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
