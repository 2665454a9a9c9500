import pytest

from skipfree import UnitDriftModel, claim_table

# Upward skip-free increment laws used across the identity suites.  The
# asymmetric entries matter: the ballot value k/n must come out the same for
# any probability assignment, which is the whole point of the check.
BALLOT_CORPUS = {
    "symmetric": [(-1, 0.5), (1, 0.5)],
    "asymmetric": [(-1, 0.3), (0, 0.3), (1, 0.4)],
    "skewed": [(-2, 0.2), (-1, 0.3), (0, 0.1), (1, 0.4)],
}


@pytest.fixture(scope="session")
def two_portfolio_model():
    """The desk-scale verification model: mean claims 0.4 + 0.3 < 1."""
    return UnitDriftModel(
        portfolios=(
            claim_table([(0, 0.8), (2, 0.2)]),
            claim_table([(0, 0.9), (3, 0.1)]),
        )
    )


@pytest.fixture(scope="session")
def single_heavy_model():
    """One portfolio, jump 3: slow convergence exercises truncation bounds."""
    return UnitDriftModel(portfolios=(claim_table([(0, 0.7), (3, 0.3)]),))
