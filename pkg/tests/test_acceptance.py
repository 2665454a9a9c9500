"""Acceptance gate: one test per release criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and timings.  Tolerances are fixed here, not tuned at run time.
"""

import itertools
import math
import time

import pytest
import yaml
from click.testing import CliRunner

from skipfree import (
    PerturbedModel,
    UnitDriftModel,
    ballot_probability,
    claim_table,
    first_passage_pmf_dp,
    geometric_claim,
    kemperman_first_passage_pmf,
    make_pmf,
    perturbation_table,
    perturbed_attribution_prob,
    portfolio_attribution_prob,
    portfolio_attribution_tail,
    qualifying_rotations,
    total_claim_pmf,
)
from skipfree import oracle
from skipfree.cli import main as cli_main
from skipfree.ruin import (
    CrossingQuery,
    estimate_perturbed_attribution,
    estimate_portfolio_attribution,
)
from skipfree.walk import default_horizon, run_visit_identity_batches

from conftest import BALLOT_CORPUS

MC_BAND = 3.5

MODEL = UnitDriftModel(
    portfolios=(
        claim_table([(0, 0.8), (2, 0.2)]),
        claim_table([(0, 0.9), (3, 0.1)]),
    )
)

# (portfolio, x, y): closed forms 0.2, 0.1 and structural zeros.
TUPLES = [(1, 1, 0), (1, 2, 0), (1, 1, -1), (2, 1, 0), (2, 2, 0), (2, 1, -1), (2, 2, -1)]


def _report(criterion: str, detail: str) -> None:
    print(f"ACCEPTANCE {criterion}: PASS ({detail})")


def test_criterion_1_ballot_theorem():
    """Enumerated conditional positivity probabilities equal k/n (1e-9)."""
    started = time.perf_counter()
    checked = 0
    worst = 0.0
    assert len(BALLOT_CORPUS) >= 3
    for entries in BALLOT_CORPUS.values():
        increments = make_pmf(entries)
        for n in range(1, 11):
            profile = oracle.ballot_profile(increments, n)
            for k, (num, den) in profile.items():
                if den <= 0.0:
                    continue
                gap = abs(num / den - ballot_probability(n, k))
                worst = max(worst, gap)
                assert gap <= 1e-9, (entries, n, k, gap)
                checked += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0
    _report("1 ballot theorem", f"{checked} conditionals, max gap {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_cyclic_rotation_counts():
    """Exhaustively, qualifying rotations number exactly -sum (integer equality)."""
    started = time.perf_counter()
    checked = 0
    for length in range(1, 9):
        for seq in itertools.product((-1, 0, 1, 2), repeat=length):
            if sum(seq) >= 0:
                continue
            cert = qualifying_rotations(seq)
            assert len(cert.qualifying_indices) == -sum(seq), seq
            checked += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0
    _report("2 cyclic rotations", f"{checked} sequences, {elapsed:.1f}s")


def test_criterion_3_hitting_time_identity():
    """(k/n) P(R(n)=k) equals the DP first-passage law entrywise (1e-12)."""
    started = time.perf_counter()
    worst = 0.0
    for entries in BALLOT_CORPUS.values():
        increments = make_pmf(entries)
        for k in range(1, 6):
            identity = kemperman_first_passage_pmf(increments, k, 50)
            direct = first_passage_pmf_dp(increments, k, 50)
            for n in range(1, 51):
                gap = abs(identity[n] - direct[n])
                worst = max(worst, gap)
                assert gap <= 1e-12, (entries, k, n, gap)
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0
    _report("3 hitting-time identity", f"max gap {worst:.2e}, {elapsed:.1f}s")


def test_criterion_4_attribution_estimates_match_closed_forms():
    """1e6-trial estimates sit within 3.5 SE of the closed forms; censoring
    stays below 1e-3; the whole sweep finishes inside two minutes."""
    started = time.perf_counter()
    horizon = default_horizon(MODEL)
    details = []
    for portfolio, x, y in TUPLES:
        cf = portfolio_attribution_prob(MODEL.portfolios[portfolio - 1], x, y)
        est = estimate_portfolio_attribution(
            MODEL, portfolio, x, y,
            trials=1_000_000, horizon=horizon, master_seed=20_240_817, workers=8,
        )
        gap = abs(est.p_hat - cf)
        assert gap <= MC_BAND * est.std_err + 1e-12, (portfolio, x, y, cf, est)
        assert est.censored_fraction < 1e-3
        details.append(f"({portfolio},{x},{y})~{gap / est.std_err if est.std_err else 0:.1f}se")
    elapsed = time.perf_counter() - started
    assert elapsed < 120.0
    _report("4 attribution estimates", f"horizon {horizon}, {'; '.join(details)}, {elapsed:.0f}s")


def test_criterion_5_oracle_bracketing():
    """Exhaustive truncations rise with the horizon and never pass the closed
    forms (1e-9 slack)."""
    queries = [
        CrossingQuery(model=MODEL, x=x, y=y, portfolio_index=p) for p, x, y in TUPLES
    ]
    profile = oracle.crossing_truncation_profile(MODEL, queries, 14)
    for (p, x, y), row in zip(TUPLES, profile):
        cf = portfolio_attribution_prob(MODEL.portfolios[p - 1], x, y)
        for h in range(8, 15):
            assert row[h] + 1e-15 >= row[h - 1], (p, x, y, h)
            assert row[h] <= cf + 1e-9, (p, x, y, h, row[h], cf)
    _report("5 oracle bracketing", f"{len(TUPLES)} tuples, horizons 8..14")


def test_criterion_6_marginalized_attribution():
    """The y-sum of fixed-level forms telescopes to the tail form, and the
    marginal Monte Carlo event matches it."""
    # Exact telescoping, including a truncated family where tail_mass > 0.
    for claim in [MODEL.portfolios[0], MODEL.portfolios[1], geometric_claim(0.5)]:
        for x in (1, 2):
            span = claim.dist.support_max
            summed = math.fsum(
                portfolio_attribution_prob(claim, x, y) for y in range(0, -span - 2, -1)
            )
            tail = portfolio_attribution_tail(claim, x)
            assert abs(summed - tail) <= 1e-12 + claim.dist.tail_mass
    # Monte Carlo on the marginal event.
    horizon = default_horizon(MODEL)
    checks = []
    for portfolio, x in [(1, 1), (2, 2)]:
        cf = portfolio_attribution_tail(MODEL.portfolios[portfolio - 1], x)
        est = estimate_portfolio_attribution(
            MODEL, portfolio, x, None,
            trials=1_000_000, horizon=horizon, master_seed=614, workers=8,
        )
        assert abs(est.p_hat - cf) <= MC_BAND * est.std_err + 1e-12
        checks.append(f"({portfolio},{x})")
    _report("6 marginalized attribution", f"telescoping + MC {', '.join(checks)}")


def test_criterion_7_perturbed_attribution():
    """Claim-caused crossing estimates match the two-term closed form for a
    two-point and a three-point perturbation; the degenerate +1 perturbation
    reproduces the unit-drift pipeline."""
    claims = claim_table([(0, 0.4), (2, 0.6)])
    for z_entries in ([(-1, 0.5), (1, 0.5)], [(-1, 0.5), (0, 0.25), (1, 0.25)]):
        z = perturbation_table(z_entries)
        model = PerturbedModel(portfolios=(claims,), perturbation=z)
        horizon = default_horizon(model)
        # Gaps x - y with no claim mass: the two-term form then prices the
        # landing-conditioned event exactly (see perturbed_attribution_prob).
        for x, y in [(1, 0), (2, -1)]:
            cf = perturbed_attribution_prob(total_claim_pmf(model), z, x, y)
            est = estimate_perturbed_attribution(
                model, x, y, trials=1_000_000, horizon=horizon, master_seed=99, workers=8
            )
            assert abs(est.p_hat - cf) <= MC_BAND * est.std_err + 1e-12, (z_entries, x, y)
    # Degenerate perturbation: identical model, different pipeline.
    unit = UnitDriftModel(portfolios=(claims,))
    degenerate = PerturbedModel(portfolios=(claims,), perturbation=perturbation_table([(1, 1.0)]))
    a = estimate_portfolio_attribution(
        unit, 1, 1, 0, trials=1_000_000, horizon=default_horizon(unit),
        master_seed=123, workers=8,
    )
    b = estimate_perturbed_attribution(
        degenerate, 1, 0, trials=1_000_000, horizon=default_horizon(degenerate),
        master_seed=321, workers=8,
    )
    spread = math.sqrt(a.std_err**2 + b.std_err**2)
    assert abs(a.p_hat - b.p_hat) <= MC_BAND * spread
    _report("7 perturbed attribution", f"two z laws + degenerate, |gap|={abs(a.p_hat - b.p_hat):.2e}")


def test_criterion_8_jump_functional_identity():
    """Summing a predictable indicator functional against observed jumps
    agrees with summing it against the jump law (3.5 SE), for three
    functionals of the attribution shape."""
    trials = 400_000
    for portfolio, x, y in [(1, 1, 0), (2, 2, 0), (2, 1, -1)]:
        stats = run_visit_identity_batches(
            MODEL,
            portfolio_index=portfolio, x=x, y=y,
            horizon=512, trials=trials, master_seed=271_828, workers=8,
        )
        sum_a, sum_b, sum_a2, sum_b2, sum_ab = (float(v) for v in stats)
        gap_prob = MODEL.portfolios[portfolio - 1].prob_at(x + 1 - y)
        mean_diff = (sum_a - gap_prob * sum_b) / trials
        second = (sum_a2 - 2 * gap_prob * sum_ab + gap_prob**2 * sum_b2) / trials
        se = math.sqrt(max(second - mean_diff**2, 0.0) / trials)
        assert abs(mean_diff) <= MC_BAND * se + 1e-12, (portfolio, x, y)
    _report("8 jump-functional identity", "3 functionals within 3.5 SE")


def test_criterion_9_byte_identical_reports(tmp_path):
    """The verify command writes byte-identical reports at 1, 2, and 8 workers."""
    config = {
        "schema_version": 1,
        "model": {
            "kind": "unit_drift",
            "portfolios": [
                {"family": "table", "entries": [[0, 0.8], [2, 0.2]]},
                {"family": "table", "entries": [[0, 0.9], [3, 0.1]]},
            ],
        },
        "verify": {
            "trials": 200_000,
            "horizon": "auto",
            "oracle_horizon": 10,
            "master_seed": 424_242,
            "queries": [
                {"portfolio": 1, "x": 1, "y": 0},
                {"portfolio": 2, "x": 2, "y": 0},
                {"portfolio": 2, "x": 1, "y": -1},
                {"portfolio": 1, "x": 1},
            ],
        },
    }
    config_path = tmp_path / "verify.yaml"
    config_path.write_text(yaml.safe_dump(config))
    runner = CliRunner()
    payloads = []
    for workers in (1, 2, 8):
        out = tmp_path / f"report_w{workers}.csv"
        result = runner.invoke(
            cli_main,
            [
                "verify",
                "--config", str(config_path),
                "--workers", str(workers),
                "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        payloads.append(out.read_bytes())
    assert payloads[0] == payloads[1] == payloads[2]
    _report("9 reproducible reports", f"{len(payloads[0])} bytes identical at 1/2/8 workers")
