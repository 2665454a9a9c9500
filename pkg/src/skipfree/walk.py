"""Discrete-time risk models, their dual walks, and seeded path simulation.

Two model variants are supported.  The unit-drift model earns premium 1 per
period and pays the summed increments of ``m`` independent nondecreasing
claims walks; its dual surplus walk moves by (total claim - 1) each step and
is downwards skip-free.  The perturbed model replaces the deterministic
premium with an upwards skip-free perturbation walk.

Simulation is deterministic: trial ``t`` of a run seeded with ``s`` draws
from a SplitMix64 stream seeded by ``derive_trial_seed(s, t)``, so aggregate
counts do not depend on chunking or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple, Union

import numpy as np

from . import _kernels
from .errors import BadParameter, NetProfitViolation
from .pmf import (
    ClaimPMF,
    IntegerPMF,
    PerturbationPMF,
    convolve,
    expectation,
    negated,
    shifted,
    variance,
)

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB

DEFAULT_NO_RETURN_TOL = 1e-9
_BARRIER_OFF = 1 << 62


@dataclass(frozen=True)
class UnitDriftModel:
    """Risk process with premium +1 per period and ``m >= 1`` claim portfolios."""

    portfolios: Tuple[ClaimPMF, ...]

    def __post_init__(self):
        if len(self.portfolios) < 1:
            raise BadParameter("a model needs at least one claim portfolio")


@dataclass(frozen=True)
class PerturbedModel:
    """Risk process driven by a perturbation walk instead of a fixed premium."""

    portfolios: Tuple[ClaimPMF, ...]
    perturbation: PerturbationPMF

    def __post_init__(self):
        if len(self.portfolios) < 1:
            raise BadParameter("a model needs at least one claim portfolio")


RiskModelSpec = Union[UnitDriftModel, PerturbedModel]


def claim_means(model: RiskModelSpec) -> Tuple[float, ...]:
    return tuple(p.mean for p in model.portfolios)


def drift_mean(model: RiskModelSpec) -> float:
    """Mean of the premium side: 1 for unit drift, E[Z] for perturbed."""
    if isinstance(model, PerturbedModel):
        return model.perturbation.mean
    return 1.0


def validate_model(model: RiskModelSpec) -> RiskModelSpec:
    """Check the net profit condition; return the model unchanged if it holds.

    Unit drift requires total mean claims strictly below 1; the perturbed
    model requires them strictly below the perturbation mean.  Everything
    else in this package runs on unvalidated models too (some identities hold
    regardless of drift); validation is the caller's gate, not a hidden one.

    Raises:
        NetProfitViolation: carrying both means for reporting.
    """
    mu = sum(claim_means(model))
    drift = drift_mean(model)
    if not mu < drift:
        raise NetProfitViolation(mu, drift)
    return model


@lru_cache(maxsize=None)
def total_claim_pmf(model: RiskModelSpec) -> ClaimPMF:
    """Law of the summed one-step claim increment over all portfolios."""
    dist = model.portfolios[0].dist
    for p in model.portfolios[1:]:
        dist = convolve(dist, p.dist)
    return ClaimPMF(dist)


@lru_cache(maxsize=None)
def dual_step_pmf(model: RiskModelSpec) -> IntegerPMF:
    """Increment law of the dual surplus walk (total claims minus drift)."""
    total = total_claim_pmf(model).dist
    if isinstance(model, PerturbedModel):
        return convolve(total, negated(model.perturbation.dist))
    return shifted(total, -1)


@dataclass(frozen=True)
class StepDraw:
    """One period's sampled increments: per-portfolio claim jumps and the
    premium-side jump (fixed +1 for unit drift)."""

    component_jumps: Tuple[int, ...]
    z_jump: int


def dual_increment(step: StepDraw) -> int:
    """Movement of the dual walk for this draw: total claims minus drift jump."""
    return sum(step.component_jumps) - step.z_jump


@dataclass(frozen=True)
class Crossed:
    """First passage of the dual walk over level 0.

    ``y_pre`` is the position one step earlier, ``landing`` the position after
    the jump, ``step`` the full draw that caused it, and ``touched_zero``
    records whether the walk revisited level 0 strictly between start and
    crossing (the level-crossing identities require that it did not).
    """

    tau: int
    y_pre: int
    landing: int
    step: StepDraw
    touched_zero: bool


@dataclass(frozen=True)
class Censored:
    """No crossing within the horizon."""

    horizon: int
    final_position: int


CrossingRecord = Union[Crossed, Censored]


def _mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & MASK64
    return z ^ (z >> 31)


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """Counter-based per-trial seed: a pure function of (master, index)."""
    return _mix64((master_seed + (trial_index + 1) * _GOLDEN) & MASK64)


class _Stream:
    """Python mirror of the compiled SplitMix64 stream (same draw order)."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def uniform(self) -> float:
        self.state = (self.state + _GOLDEN) & MASK64
        return (_mix64(self.state) >> 11) * 2.0**-53


def _build_alias(dist: IntegerPMF):
    """Vose alias table: O(1) draws regardless of support size."""
    k = len(dist.values)
    values = np.array(dist.values, dtype=np.int64)
    q = np.ones(k, dtype=np.float64)
    alias = np.arange(k, dtype=np.int64)
    total = math.fsum(dist.probs)
    scaled = [p / total * k for p in dist.probs]
    small = [i for i, s in enumerate(scaled) if s < 1.0]
    large = [i for i, s in enumerate(scaled) if s >= 1.0]
    while small and large:
        s = small.pop()
        g = large.pop()
        q[s] = scaled[s]
        alias[s] = g
        scaled[g] -= 1.0 - scaled[s]
        if scaled[g] < 1.0:
            small.append(g)
        else:
            large.append(g)
    # Float residue leaves a few buckets unpaired; they keep q = 1.
    return values, q, alias


@lru_cache(maxsize=None)
def _model_tables(model: RiskModelSpec):
    """Flattened alias tables for the compiled kernels."""
    sizes = []
    offsets = [0]
    values = []
    q = []
    alias = []
    for p in model.portfolios:
        v, qq, al = _build_alias(p.dist)
        sizes.append(len(v))
        values.extend(v.tolist())
        q.extend(qq.tolist())
        alias.extend(al.tolist())
        offsets.append(len(values))
    if isinstance(model, PerturbedModel):
        zv, zq, za = _build_alias(model.perturbation.dist)
        has_z = True
    else:
        zv = np.zeros(1, dtype=np.int64)
        zq = np.ones(1, dtype=np.float64)
        za = np.zeros(1, dtype=np.int64)
        has_z = False
    return {
        "sizes": np.array(sizes, dtype=np.int64),
        "offsets": np.array(offsets[:-1], dtype=np.int64),
        "values": np.array(values, dtype=np.int64),
        "q": np.array(q, dtype=np.float64),
        "alias": np.array(alias, dtype=np.int64),
        "has_z": has_z,
        "z_values": np.asarray(zv, dtype=np.int64),
        "z_q": np.asarray(zq, dtype=np.float64),
        "z_alias": np.asarray(za, dtype=np.int64),
    }


def _draw_from_alias(values, q, alias, stream: _Stream) -> int:
    k = len(values)
    u1 = stream.uniform()
    u2 = stream.uniform()
    j = min(int(u1 * k), k - 1)
    if u2 < q[j]:
        return int(values[j])
    return int(values[alias[j]])


def draw_step(model: RiskModelSpec, stream: _Stream) -> StepDraw:
    """Sample one period's increments, consuming the stream in kernel order."""
    tables = _model_tables(model)
    jumps = []
    for c in range(len(model.portfolios)):
        base = int(tables["offsets"][c])
        size = int(tables["sizes"][c])
        jumps.append(
            _draw_from_alias(
                tables["values"][base : base + size],
                tables["q"][base : base + size],
                tables["alias"][base : base + size],
                stream,
            )
        )
    if tables["has_z"]:
        zj = _draw_from_alias(tables["z_values"], tables["z_q"], tables["z_alias"], stream)
    else:
        zj = 1
    return StepDraw(component_jumps=tuple(jumps), z_jump=zj)


def simulate_until_crossing(
    model: RiskModelSpec, horizon: int, trial_seed: int
) -> CrossingRecord:
    """Run the dual walk from 0 until it first exceeds 0, or the horizon ends.

    A deterministic function of (model, horizon, trial_seed): replaying with
    the same arguments reproduces the record exactly, and matches what the
    batched kernels do for the trial that owns ``trial_seed``.
    """
    if horizon < 1:
        raise BadParameter(f"horizon must be >= 1, got {horizon}")
    stream = _Stream(trial_seed)
    pos = 0
    touched = False
    for n in range(1, horizon + 1):
        step = draw_step(model, stream)
        inc = dual_increment(step)
        assert inc >= -1, "dual walk must be downwards skip-free"
        newpos = pos + inc
        if newpos > 0:
            return Crossed(
                tau=n, y_pre=pos, landing=newpos, step=step, touched_zero=touched
            )
        pos = newpos
        if pos == 0:
            touched = True
    return Censored(horizon=horizon, final_position=pos)


@dataclass(frozen=True)
class RuinEstimate:
    p_hat: float
    std_err: float
    censored_fraction: float


def binomial_std_err(p_hat: float, trials: int) -> float:
    return math.sqrt(p_hat * (1.0 - p_hat) / trials)


def adjustment_coefficient(step: IntegerPMF) -> float | None:
    """Positive root of E[exp(g * S)] = 1 for a step law S with negative mean.

    Returns None when no such root exists: either the walk cannot move up
    (never crosses) or its mean is nonnegative (crossing is not rare).  The
    returned value slightly underestimates the true root, so bounds derived
    from it are conservative.
    """
    if step.support_max <= 0:
        return None
    if expectation(step) >= 0.0:
        return None
    vals = np.array(step.values, dtype=np.float64)
    probs = np.array(step.probs, dtype=np.float64)

    def f(g: float) -> float:
        with np.errstate(over="ignore"):
            return float(np.sum(probs * np.exp(g * vals))) - 1.0

    lo, hi = 0.0, 1.0
    while f(hi) < 0.0:
        lo = hi
        hi *= 2.0
        if hi > 1e9:  # pragma: no cover - degenerate numerics
            return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def no_return_depth(
    model: RiskModelSpec, per_trial_tol: float = DEFAULT_NO_RETURN_TOL
) -> int | None:
    """Depth D such that a dual walk at or below -D crosses 0 later with
    probability <= per_trial_tol (exponential supremum bound).

    Returns 0 when crossing is impossible outright, and None when the walk
    drifts upward or sideways (no almost-sure point of no return exists).
    """
    step = dual_step_pmf(model)
    if step.support_max <= 0:
        return 0
    gamma = adjustment_coefficient(step)
    if gamma is None:
        return None
    return int(math.ceil(-math.log(per_trial_tol) / gamma))


def default_horizon(model: RiskModelSpec, band_exit_z: float = 6.0) -> int:
    """Horizon making the undecided (censored) fraction negligible.

    Under net profit the dual walk drifts down; by this horizon a trial has
    almost surely either crossed or fallen past the no-return depth.  For
    upward-drifting duals crossing itself is fast.  Walks with exactly zero
    drift get a generous flat default; their censored fraction is reported
    honestly rather than engineered away.
    """
    step = dual_step_pmf(model)
    if step.support_max <= 0:
        return 64
    mean = expectation(step)
    sd = math.sqrt(max(variance(step), 1e-12))
    if mean < 0.0:
        depth = no_return_depth(model)
        d = -mean
        root = (band_exit_z * sd + math.sqrt((band_exit_z * sd) ** 2 + 4 * d * depth)) / (
            2 * d
        )
        return max(64, int(math.ceil(root * root)) + 1)
    if mean > 0.0:
        return max(64, int(math.ceil((band_exit_z * sd / mean) ** 2)) + 1)
    return 1 << 14


def _chunk_ranges(trials: int, chunk: int):
    return [(t0, min(t0 + chunk, trials)) for t0 in range(0, trials, chunk)]


def run_crossing_batches(
    model: RiskModelSpec,
    *,
    level: int,
    horizon: int,
    trials: int,
    master_seed: int,
    workers: int = 1,
    event_kind: int = _kernels.EVENT_NONE,
    ev_portfolio: int = -1,
    ev_x: int = 0,
    ev_y: int = 0,
    barrier: int | None = None,
    chunk: int = 1 << 16,
) -> np.ndarray:
    """Run `trials` kernel trials and return summed [event, crossed, censored,
    sunk] counts.  Deterministic in (model, horizon, trials, master_seed):
    chunks are reduced in index order whatever the worker count."""
    if horizon < 1:
        raise BadParameter(f"horizon must be >= 1, got {horizon}")
    if trials < 1:
        raise BadParameter(f"trials must be >= 1, got {trials}")
    tables = _model_tables(model)
    if barrier is None:
        depth = no_return_depth(model)
        barrier = depth if (depth is not None and depth > 0) else _BARRIER_OFF
    master = np.uint64(master_seed & MASK64)

    def run(rng):
        t0, t1 = rng
        return _kernels.crossing_batch(
            master,
            t0,
            t1,
            horizon,
            level,
            barrier,
            tables["sizes"],
            tables["offsets"],
            tables["values"],
            tables["q"],
            tables["alias"],
            tables["has_z"],
            tables["z_values"],
            tables["z_q"],
            tables["z_alias"],
            event_kind,
            ev_portfolio,
            ev_x,
            ev_y,
        )

    ranges = _chunk_ranges(trials, chunk)
    if workers <= 1 or len(ranges) == 1:
        parts = [run(r) for r in ranges]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, ranges))
    total = np.zeros(4, dtype=np.int64)
    for part in parts:  # fixed chunk order; counts are order-free anyway
        total += part
    return total


def run_visit_identity_batches(
    model: UnitDriftModel,
    *,
    portfolio_index: int,
    x: int,
    y: int,
    horizon: int,
    trials: int,
    master_seed: int,
    workers: int = 1,
    chunk: int = 1 << 16,
) -> np.ndarray:
    """Per-trial visit statistics backing the jump-functional expectation
    identity: summing a predictable indicator functional against the observed
    component jumps must match summing it against the jump law.

    Returns int64 [sum A, sum B, sum A^2, sum B^2, sum A*B] over trials,
    where per trial B counts qualifying visits (pre-step position y with the
    walk strictly below 0 since leaving the origin) and A those visits whose
    watched component jump equals x + 1 - y.  Not part of the public API;
    exists for property tests.
    """
    if not isinstance(model, UnitDriftModel):
        raise BadParameter("visit statistics are defined on the unit-drift model")
    if not 1 <= portfolio_index <= len(model.portfolios):
        raise BadParameter(
            f"portfolio index {portfolio_index} outside 1..{len(model.portfolios)}"
        )
    tables = _model_tables(model)
    master = np.uint64(master_seed & MASK64)

    def run(rng):
        t0, t1 = rng
        return _kernels.visit_identity_batch(
            master,
            t0,
            t1,
            horizon,
            tables["sizes"],
            tables["offsets"],
            tables["values"],
            tables["q"],
            tables["alias"],
            portfolio_index - 1,
            x,
            y,
        )

    ranges = _chunk_ranges(trials, chunk)
    if workers <= 1 or len(ranges) == 1:
        parts = [run(r) for r in ranges]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, ranges))
    total = np.zeros(5, dtype=np.int64)
    for part in parts:
        total += part
    return total


def ruin_probability_estimate(
    model: RiskModelSpec,
    u: int,
    horizon: int,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> RuinEstimate:
    """Monte Carlo frequency of ruin (dual walk exceeding u) before `horizon`.

    The censored fraction counts trials that neither crossed nor provably
    never will: trials that sink past the model's no-return depth are
    resolved as non-ruin (per-trial resolution error <= 1e-9).
    """
    if u < 0:
        raise BadParameter(f"initial capital must be >= 0, got {u}")
    step = dual_step_pmf(model)
    if step.support_max <= 0:
        return RuinEstimate(p_hat=0.0, std_err=0.0, censored_fraction=0.0)
    counts = run_crossing_batches(
        model,
        level=u,
        horizon=horizon,
        trials=trials,
        master_seed=master_seed,
        workers=workers,
    )
    p_hat = int(counts[1]) / trials
    return RuinEstimate(
        p_hat=p_hat,
        std_err=binomial_std_err(p_hat, trials),
        censored_fraction=int(counts[2]) / trials,
    )
