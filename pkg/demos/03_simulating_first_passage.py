"""Seeded simulation of the dual surplus walk and ruin estimation.

Every trial's randomness is a pure function of (master seed, trial index);
the same inputs produce the same paths, estimates, and reports on any
machine at any worker count.
"""

from skipfree import (
    Crossed,
    UnitDriftModel,
    claim_table,
    default_horizon,
    derive_trial_seed,
    no_return_depth,
    ruin_probability_estimate,
    simulate_until_crossing,
    validate_model,
)

model = validate_model(
    UnitDriftModel(
        portfolios=(
            claim_table([(0, 0.8), (2, 0.2)]),
            claim_table([(0, 0.9), (3, 0.1)]),
        )
    )
)

# Individual trials are replayable records.
for t in range(6):
    rec = simulate_until_crossing(model, horizon=64, trial_seed=derive_trial_seed(11, t))
    if isinstance(rec, Crossed):
        print(
            f"trial {t}: crossed at n={rec.tau} from y={rec.y_pre} to {rec.landing}, "
            f"jumps {rec.step.component_jumps}, revisited 0 first: {rec.touched_zero}"
        )
    else:
        print(f"trial {t}: censored at {rec.horizon}, final position {rec.final_position}")

# The model knows how deep is deep enough to call a trial resolved: once the
# walk sinks past the no-return depth, crossing later has probability below
# one in a billion.  The default horizon makes undecided trials negligible.
print("\nno-return depth:", no_return_depth(model))
print("auto horizon:", default_horizon(model))

# Ruin probability as a function of initial capital.
print("\n u    p_hat      std err    censored")
for u in (0, 1, 2, 4, 8):
    est = ruin_probability_estimate(
        model, u, horizon=default_horizon(model), trials=200_000, master_seed=2024, workers=4
    )
    print(f"{u:2d}   {est.p_hat:.5f}   {est.std_err:.2e}   {est.censored_fraction:.1e}")
