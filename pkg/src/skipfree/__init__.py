"""Exact and Monte Carlo level-crossing analysis for discrete-time risk
processes driven by skip-free integer random walks.

Submodules:
  pmf           - exact finite-support integer distributions
  combinatorics - ballot probabilities, rotation certificates, first-passage laws
  walk          - risk models, dual-walk simulation, ruin estimation
  ruin          - closed-form crossing probabilities and their estimators
  oracle        - exhaustive path enumeration (ground truth at desk scale)
  cli           - config-driven command line front end
"""

from .combinatorics import (
    RotationCertificate,
    ballot_probability,
    first_passage_pmf_dp,
    kemperman_first_passage_pmf,
    qualifying_rotations,
)
from .pmf import (
    ClaimPMF,
    IntegerPMF,
    PerturbationPMF,
    claim_table,
    convolve,
    delta,
    expectation,
    family_pmf,
    geometric_claim,
    make_pmf,
    perturbation_table,
    poisson_claim,
    power_convolve,
)
from .ruin import (
    CrossingQuery,
    McEstimate,
    VerificationReport,
    closed_form,
    estimate_perturbed_attribution,
    estimate_portfolio_attribution,
    perturbed_attribution_prob,
    portfolio_attribution_prob,
    portfolio_attribution_tail,
    verify,
)
from .walk import (
    Censored,
    Crossed,
    PerturbedModel,
    RiskModelSpec,
    RuinEstimate,
    StepDraw,
    UnitDriftModel,
    default_horizon,
    derive_trial_seed,
    dual_increment,
    dual_step_pmf,
    no_return_depth,
    ruin_probability_estimate,
    simulate_until_crossing,
    total_claim_pmf,
    validate_model,
)

__all__ = [
    "ClaimPMF",
    "IntegerPMF",
    "PerturbationPMF",
    "claim_table",
    "convolve",
    "delta",
    "expectation",
    "family_pmf",
    "geometric_claim",
    "make_pmf",
    "perturbation_table",
    "poisson_claim",
    "power_convolve",
    "RotationCertificate",
    "ballot_probability",
    "first_passage_pmf_dp",
    "kemperman_first_passage_pmf",
    "qualifying_rotations",
    "CrossingQuery",
    "McEstimate",
    "VerificationReport",
    "closed_form",
    "estimate_perturbed_attribution",
    "estimate_portfolio_attribution",
    "perturbed_attribution_prob",
    "portfolio_attribution_prob",
    "portfolio_attribution_tail",
    "verify",
    "Censored",
    "Crossed",
    "PerturbedModel",
    "RiskModelSpec",
    "RuinEstimate",
    "StepDraw",
    "UnitDriftModel",
    "default_horizon",
    "derive_trial_seed",
    "dual_increment",
    "dual_step_pmf",
    "no_return_depth",
    "ruin_probability_estimate",
    "simulate_until_crossing",
    "total_claim_pmf",
    "validate_model",
    "__version__",
]

__version__ = "0.1.0"
