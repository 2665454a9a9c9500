"""Exception types shared across the package.

Every error raised on bad input derives from :class:`SkipfreeError`, which
itself derives from ``ValueError`` so callers that only know stdlib idioms
still catch what they expect.
"""


class SkipfreeError(ValueError):
    """Base class for all package-specific errors."""


class NegativeProbability(SkipfreeError):
    """An entry carries a probability below zero."""


class MassNotOne(SkipfreeError):
    """Total probability mass deviates from 1 beyond tolerance."""


class BadParameter(SkipfreeError):
    """A distribution family parameter is outside its valid range."""


class DomainError(SkipfreeError):
    """An argument is outside the mathematical domain of the operation."""


class BadSequence(SkipfreeError):
    """An integer sequence violates the entry or sum constraints."""


class NotSkipFree(SkipfreeError):
    """An increment distribution has support above +1."""


class NetProfitViolation(SkipfreeError):
    """Mean claims are not strictly dominated by the premium drift.

    Carries the offending means so callers can report them.
    """

    def __init__(self, claim_mean: float, drift_mean: float):
        self.claim_mean = claim_mean
        self.drift_mean = drift_mean
        super().__init__(
            f"net profit condition violated: mean claim increment {claim_mean!r} "
            f"must be strictly below the drift mean {drift_mean!r}"
        )


class BudgetExceeded(SkipfreeError):
    """Exhaustive enumeration would visit more nodes than the budget allows.

    ``required`` is the number of nodes the enumeration needs (a lower bound
    when the count was cut short), ``budget`` the configured ceiling.
    """

    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"enumeration budget exceeded: needs >= {required} nodes, budget is {budget}"
        )
