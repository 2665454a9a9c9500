"""Closed-form level-crossing probabilities and their Monte Carlo estimators.

The closed forms price the event "the dual surplus walk first exceeds 0 by
jumping from pre-level y to at least x, with a named portfolio (or the whole
claim side) supplying the jump" for walks that stay strictly below 0 between
start and crossing.  Estimators simulate the event directly; ``verify``
packages estimate, closed form, and an optional exhaustive-enumeration
truncation into one report row.

A note on the strictness condition: the identities hold for first passages
in which the dual walk never revisits level 0 after leaving it.  Crossings
that return to 0 first are excluded both here and in the oracle; dropping
the condition demonstrably breaks the identities (see tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from . import _kernels
from .errors import BadParameter
from .pmf import ClaimPMF, PerturbationPMF
from .walk import (
    PerturbedModel,
    RiskModelSpec,
    UnitDriftModel,
    binomial_std_err,
    run_crossing_batches,
)

MC_SIGMA_BAND = 3.5
ORACLE_SLACK = 1e-9


def _require_levels(x: int, y: Optional[int]) -> None:
    if x < 1:
        raise BadParameter(f"landing level x must be >= 1, got {x}")
    if y is not None and y > 0:
        raise BadParameter(f"pre-crossing level y must be <= 0, got {y}")


def portfolio_attribution_prob(claim: ClaimPMF, x: int, y: int) -> float:
    """P(first passage lands >= x from pre-level y with this portfolio jumping
    exactly x + 1 - y): a single PMF lookup."""
    _require_levels(x, y)
    return claim.prob_at(x + 1 - y)


def portfolio_attribution_tail(claim: ClaimPMF, x: int) -> float:
    """Pre-level-marginalized attribution probability: P(C >= x + 1),
    including the claim law's recorded truncation tail."""
    _require_levels(x, None)
    return claim.tail_from(x + 1)


def perturbed_attribution_prob(
    claims_total: ClaimPMF, perturbation: PerturbationPMF, x: int, y: int
) -> float:
    """Probability that the claim side causes the first passage (perturbed
    model): P(C >= x+1-y) P(Z = -1) + P(C >= x-y) P(Z >= 0).

    Boundary caveat: the draw (C = x-y, Z = +1) satisfies the second term but
    lands the walk at x-1, short of the landing requirement, so whenever
    P(C = x-y) P(Z = 1) > 0 this formula strictly exceeds the probability of
    the landing-conditioned event that ``estimate_perturbed_attribution``
    measures.  On claim laws with no mass at x-y the two agree exactly.
    """
    _require_levels(x, y)
    return claims_total.tail_from(x + 1 - y) * perturbation.prob_at(
        -1
    ) + claims_total.tail_from(x - y) * perturbation.tail_from(0)


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    std_err: float
    trials: int
    censored_fraction: float


def _finish(counts, trials: int) -> McEstimate:
    p_hat = int(counts[0]) / trials
    return McEstimate(
        p_hat=p_hat,
        std_err=binomial_std_err(p_hat, trials),
        trials=trials,
        censored_fraction=int(counts[2]) / trials,
    )


def estimate_portfolio_attribution(
    model: UnitDriftModel,
    portfolio_index: int,
    x: int,
    y: Optional[int],
    trials: int,
    horizon: int,
    master_seed: int,
    workers: int = 1,
) -> McEstimate:
    """Monte Carlo frequency of the portfolio-attributed crossing event.

    ``portfolio_index`` is 1-based.  ``y`` fixes the pre-crossing level; pass
    None to marginalize it (the component must then bridge whatever gap its
    trial's pre-level leaves).  Censored trials count as event-false and are
    reported via ``censored_fraction``.
    """
    if not isinstance(model, UnitDriftModel):
        raise BadParameter("portfolio attribution events live on the unit-drift model")
    if not 1 <= portfolio_index <= len(model.portfolios):
        raise BadParameter(
            f"portfolio index {portfolio_index} outside 1..{len(model.portfolios)}"
        )
    _require_levels(x, y)
    kind = (
        _kernels.EVENT_COMPONENT_GAP if y is not None else _kernels.EVENT_COMPONENT_GAP_ANY_Y
    )
    counts = run_crossing_batches(
        model,
        level=0,
        horizon=horizon,
        trials=trials,
        master_seed=master_seed,
        workers=workers,
        event_kind=kind,
        ev_portfolio=portfolio_index - 1,
        ev_x=x,
        ev_y=y if y is not None else 0,
    )
    return _finish(counts, trials)


def estimate_perturbed_attribution(
    model: PerturbedModel,
    x: int,
    y: int,
    trials: int,
    horizon: int,
    master_seed: int,
    workers: int = 1,
) -> McEstimate:
    """Monte Carlo frequency of the claim-side-caused crossing event in the
    perturbed model (fixed pre-level y)."""
    if not isinstance(model, PerturbedModel):
        raise BadParameter("whole-claim attribution events live on the perturbed model")
    _require_levels(x, y)
    counts = run_crossing_batches(
        model,
        level=0,
        horizon=horizon,
        trials=trials,
        master_seed=master_seed,
        workers=workers,
        event_kind=_kernels.EVENT_WHOLE_CLAIM,
        ev_portfolio=-1,
        ev_x=x,
        ev_y=y,
    )
    return _finish(counts, trials)


@dataclass(frozen=True)
class CrossingQuery:
    """One crossing event to price, estimate, and optionally enumerate.

    ``portfolio_index`` is 1-based; None means whole-claim attribution, which
    requires a perturbed model.  ``y`` is the fixed pre-crossing level; None
    marginalizes it (unit-drift only).
    """

    model: RiskModelSpec
    x: int
    y: Optional[int] = None
    portfolio_index: Optional[int] = None

    def __post_init__(self):
        _require_levels(self.x, self.y)
        if self.portfolio_index is None:
            if not isinstance(self.model, PerturbedModel):
                raise BadParameter("whole-claim queries need a perturbed model")
            if self.y is None:
                raise BadParameter("whole-claim queries need a fixed pre-level y")
        else:
            if not isinstance(self.model, UnitDriftModel):
                raise BadParameter("portfolio queries need a unit-drift model")
            if not 1 <= self.portfolio_index <= len(self.model.portfolios):
                raise BadParameter(
                    f"portfolio index {self.portfolio_index} outside "
                    f"1..{len(self.model.portfolios)}"
                )


def closed_form(query: CrossingQuery) -> float:
    """Dispatch to the closed form matching the query shape."""
    if query.portfolio_index is None:
        model = query.model
        from .walk import total_claim_pmf

        return perturbed_attribution_prob(
            total_claim_pmf(model), model.perturbation, query.x, query.y
        )
    claim = query.model.portfolios[query.portfolio_index - 1]
    if query.y is None:
        return portfolio_attribution_tail(claim, query.x)
    return portfolio_attribution_prob(claim, query.x, query.y)


@dataclass(frozen=True)
class VerificationReport:
    """Closed form vs Monte Carlo (and optionally vs exhaustive truncation)
    for one crossing query."""

    query: CrossingQuery
    closed_form: float
    mc_estimate: float
    mc_std_err: float
    trials: int
    censored_fraction: float
    oracle_truncated: Optional[float] = None
    oracle_horizon: Optional[int] = None

    @property
    def mc_consistent(self) -> bool:
        """|closed form - estimate| within 3.5 standard errors."""
        return abs(self.closed_form - self.mc_estimate) <= MC_SIGMA_BAND * self.mc_std_err

    @property
    def oracle_bounded(self) -> bool:
        """Truncated enumeration never exceeds the closed form (when run)."""
        if self.oracle_truncated is None:
            return True
        return self.oracle_truncated <= self.closed_form + ORACLE_SLACK

    @property
    def passed(self) -> bool:
        return self.mc_consistent and self.oracle_bounded

    def se_error_ratio(self) -> float:
        """|closed - estimate| in standard-error units (inf if SE is 0 and
        the values differ)."""
        gap = abs(self.closed_form - self.mc_estimate)
        if self.mc_std_err == 0.0:
            return 0.0 if gap == 0.0 else math.inf
        return gap / self.mc_std_err


def verify(
    query: CrossingQuery,
    trials: int,
    horizon: int,
    oracle_horizon: Optional[int],
    master_seed: int,
    workers: int = 1,
) -> VerificationReport:
    """Assemble closed form, Monte Carlo estimate, and optional enumeration
    truncation for one query."""
    cf = closed_form(query)
    if query.portfolio_index is None:
        est = estimate_perturbed_attribution(
            query.model, query.x, query.y, trials, horizon, master_seed, workers
        )
    else:
        est = estimate_portfolio_attribution(
            query.model,
            query.portfolio_index,
            query.x,
            query.y,
            trials,
            horizon,
            master_seed,
            workers,
        )
    oracle_value = None
    if oracle_horizon is not None:
        from . import oracle as oracle_mod

        oracle_value = oracle_mod.crossing_truncation(query.model, query, oracle_horizon)
    return VerificationReport(
        query=query,
        closed_form=cf,
        mc_estimate=est.p_hat,
        mc_std_err=est.std_err,
        trials=est.trials,
        censored_fraction=est.censored_fraction,
        oracle_truncated=oracle_value,
        oracle_horizon=oracle_horizon,
    )
