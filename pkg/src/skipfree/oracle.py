"""Exhaustive path enumeration: exact ground truth at desk scale.

Every probability here is a sum over complete increment histories of a
finite-support model, weighted by exact products of step probabilities, with
compensated (Kahan) accumulation.  Branches terminate as soon as the queried
event is decided for all extensions; the node budget is enforced on the
*pruned* tree (counted exactly where a cheap count exists, otherwise during
the walk) and exceeding it is a hard error, never silent sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import BadParameter, BudgetExceeded, NotSkipFree
from .pmf import IntegerPMF
from .ruin import CrossingQuery
from .walk import PerturbedModel, RiskModelSpec, StepDraw, dual_increment

DEFAULT_BUDGET = 100_000_000


def _joint_steps(model: RiskModelSpec) -> List[Tuple[float, int, Tuple[int, ...], int]]:
    """All one-period draws as (prob, dual_increment, component_jumps, z_jump)."""
    combos: List[Tuple[float, Tuple[int, ...]]] = [(1.0, ())]
    for portfolio in model.portfolios:
        combos = [
            (p * q, jumps + (v,))
            for p, jumps in combos
            for v, q in zip(portfolio.dist.values, portfolio.dist.probs)
        ]
    if isinstance(model, PerturbedModel):
        z_entries = list(
            zip(model.perturbation.dist.values, model.perturbation.dist.probs)
        )
    else:
        z_entries = [(1, 1.0)]
    out = []
    for p, jumps in combos:
        for zv, zp in z_entries:
            out.append((p * zp, sum(jumps) - zv, jumps, zv))
    return out


class _Kahan:
    __slots__ = ("total", "_comp")

    def __init__(self):
        self.total = 0.0
        self._comp = 0.0

    def add(self, x: float) -> None:
        y = x - self._comp
        t = self.total + y
        self._comp = (t - self.total) - y
        self.total = t


# ---------------------------------------------------------------------------
# Path events
# ---------------------------------------------------------------------------


@dataclass
class PathView:
    """Read-only view of a path prefix handed to event predicates.

    ``positions[t]`` is the dual walk at time t (``positions[0] == 0``);
    ``steps[t-1]`` produced it.  ``horizon`` is the enumeration depth.
    """

    horizon: int
    positions: List[int] = field(default_factory=lambda: [0])
    steps: List[StepDraw] = field(default_factory=list)

    @property
    def time(self) -> int:
        return len(self.positions) - 1

    def crossing_time(self) -> Optional[int]:
        for t in range(1, len(self.positions)):
            if self.positions[t] > 0:
                return t
        return None

    def touched_zero_before(self, t: int) -> bool:
        return any(self.positions[i] == 0 for i in range(1, t))


class PathEvent:
    """Three-valued predicate over path prefixes.

    ``status`` returns True/False only when the value is already forced for
    every extension of the prefix (``final=True`` marks a complete path, where
    an answer is mandatory).  The enumerator prunes on decided statuses.
    """

    def status(self, path: PathView, final: bool) -> Optional[bool]:
        raise NotImplementedError

    def __and__(self, other: "PathEvent") -> "PathEvent":
        return all_of(self, other)

    def __or__(self, other: "PathEvent") -> "PathEvent":
        return any_of(self, other)

    def __invert__(self) -> "PathEvent":
        return negation(self)


@dataclass(frozen=True)
class _PositionAt(PathEvent):
    t: int
    lo: Optional[int]
    hi: Optional[int]

    def status(self, path, final):
        if path.time < self.t:
            return None
        p = path.positions[self.t]
        ok = (self.lo is None or p >= self.lo) and (self.hi is None or p <= self.hi)
        return ok


def position_at(t: int, lo: Optional[int] = None, hi: Optional[int] = None) -> PathEvent:
    """Dual position at time t lies in [lo, hi] (missing bound = unbounded)."""
    if t < 0:
        raise BadParameter("time must be >= 0")
    return _PositionAt(t, lo, hi)


@dataclass(frozen=True)
class _RunningMaxAtMost(PathEvent):
    bound: int
    through: int

    def status(self, path, final):
        upto = min(path.time, self.through)
        if any(path.positions[t] > self.bound for t in range(1, upto + 1)):
            return False
        if path.time >= self.through:
            return True
        return None


def running_max_at_most(bound: int, through: int) -> PathEvent:
    """max of dual positions over times 1..through stays <= bound."""
    return _RunningMaxAtMost(bound, through)


@dataclass(frozen=True)
class _CrossingTimeIn(PathEvent):
    lo: int
    hi: Optional[int]

    def status(self, path, final):
        tau = path.crossing_time()
        if tau is not None:
            return self.lo <= tau and (self.hi is None or tau <= self.hi)
        if self.hi is not None and path.time >= self.hi:
            return False
        if final:
            return False
        return None


def crossing_time_in(lo: int = 1, hi: Optional[int] = None) -> PathEvent:
    """First passage over level 0 happens at a time in [lo, hi] (hi defaults
    to the enumeration horizon)."""
    return _CrossingTimeIn(lo, hi)


@dataclass(frozen=True)
class _AtCrossing(PathEvent):
    """Base for predicates that look at the crossing step itself."""

    def check(self, path: PathView, tau: int) -> bool:  # pragma: no cover
        raise NotImplementedError

    def status(self, path, final):
        tau = path.crossing_time()
        if tau is not None:
            return self.check(path, tau)
        return False if final else None


@dataclass(frozen=True)
class _CrossingPreLevel(_AtCrossing):
    y: int

    def check(self, path, tau):
        return path.positions[tau - 1] == self.y


def crossing_pre_level(y: int) -> PathEvent:
    """Position one step before the first passage equals y."""
    return _CrossingPreLevel(y)


@dataclass(frozen=True)
class _CrossingLandingAtLeast(_AtCrossing):
    x: int

    def check(self, path, tau):
        return path.positions[tau] >= self.x


def crossing_landing_at_least(x: int) -> PathEvent:
    return _CrossingLandingAtLeast(x)


@dataclass(frozen=True)
class _CrossingComponentJump(_AtCrossing):
    index: int  # 0-based component
    equals: Optional[int]
    at_least: Optional[int]

    def check(self, path, tau):
        v = path.steps[tau - 1].component_jumps[self.index]
        if self.equals is not None and v != self.equals:
            return False
        if self.at_least is not None and v < self.at_least:
            return False
        return True


def crossing_component_jump(
    index: int, equals: Optional[int] = None, at_least: Optional[int] = None
) -> PathEvent:
    """Condition on one portfolio's jump at the crossing step (0-based index)."""
    return _CrossingComponentJump(index, equals, at_least)


@dataclass(frozen=True)
class _CrossingTotalClaimJump(_AtCrossing):
    at_least: int

    def check(self, path, tau):
        return sum(path.steps[tau - 1].component_jumps) >= self.at_least


def crossing_total_claim_jump_at_least(v: int) -> PathEvent:
    return _CrossingTotalClaimJump(v)


@dataclass(frozen=True)
class _CrossingPerturbationJump(_AtCrossing):
    equals: Optional[int]
    at_least: Optional[int]

    def check(self, path, tau):
        v = path.steps[tau - 1].z_jump
        if self.equals is not None and v != self.equals:
            return False
        if self.at_least is not None and v < self.at_least:
            return False
        return True


def crossing_perturbation_jump(
    equals: Optional[int] = None, at_least: Optional[int] = None
) -> PathEvent:
    return _CrossingPerturbationJump(equals, at_least)


@dataclass(frozen=True)
class _NoZeroRevisit(PathEvent):
    def status(self, path, final):
        tau = path.crossing_time()
        limit = tau if tau is not None else path.time + 1
        if any(path.positions[t] == 0 for t in range(1, limit)):
            return False
        if tau is not None:
            return True
        return False if final else None


def no_zero_revisit_before_crossing() -> PathEvent:
    """The walk crosses without ever re-touching level 0 after time 0.

    This is the history condition under which the closed-form crossing
    identities hold.
    """
    return _NoZeroRevisit()


@dataclass(frozen=True)
class _FirstTimeAtOrBelow(PathEvent):
    level: int
    at_time: int

    def status(self, path, final):
        for t in range(1, path.time + 1):
            if path.positions[t] <= self.level:
                return t == self.at_time
        if path.time >= self.at_time:
            return False
        return False if final else None


def first_descent_to(level: int, at_time: int) -> PathEvent:
    """The dual walk first reaches `level` (<= 0) exactly at `at_time`.

    Downward moves are unit steps, so "at or below" coincides with "exactly
    at" for the first visit.
    """
    if level > 0:
        raise BadParameter("descent level must be <= 0")
    return _FirstTimeAtOrBelow(level, at_time)


@dataclass(frozen=True)
class _AllOf(PathEvent):
    parts: Tuple[PathEvent, ...]

    def status(self, path, final):
        undecided = False
        for part in self.parts:
            s = part.status(path, final)
            if s is False:
                return False
            if s is None:
                undecided = True
        return None if undecided else True


@dataclass(frozen=True)
class _AnyOf(PathEvent):
    parts: Tuple[PathEvent, ...]

    def status(self, path, final):
        undecided = False
        for part in self.parts:
            s = part.status(path, final)
            if s is True:
                return True
            if s is None:
                undecided = True
        return None if undecided else False


@dataclass(frozen=True)
class _Not(PathEvent):
    part: PathEvent

    def status(self, path, final):
        s = self.part.status(path, final)
        return None if s is None else not s


def all_of(*events: PathEvent) -> PathEvent:
    return _AllOf(tuple(events))


def any_of(*events: PathEvent) -> PathEvent:
    return _AnyOf(tuple(events))


def negation(event: PathEvent) -> PathEvent:
    return _Not(event)


# ---------------------------------------------------------------------------
# Generic enumeration
# ---------------------------------------------------------------------------


def event_probability(
    model: RiskModelSpec,
    event: PathEvent,
    horizon: int,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """Exact probability of ``event`` over all increment histories of length
    <= horizon.

    Branches stop as soon as the event is decided either way.  Visited edges
    are counted against ``budget``; exceeding it raises.

    Raises:
        BudgetExceeded: the pruned tree is larger than the budget.
        BadParameter: the event is still undecided on a complete path.
    """
    if horizon < 1:
        raise BadParameter(f"horizon must be >= 1, got {horizon}")
    joint = _joint_steps(model)
    path = PathView(horizon=horizon)
    acc = _Kahan()
    visited = 0

    def descend(depth: int, prob: float) -> None:
        nonlocal visited
        status = event.status(path, final=(depth == horizon))
        if status is True:
            acc.add(prob)
            return
        if status is False:
            return
        if depth == horizon:
            raise BadParameter("event is undecided on a complete path")
        for p, inc, jumps, zv in joint:
            visited += 1
            if visited > budget:
                raise BudgetExceeded(required=visited, budget=budget)
            path.positions.append(path.positions[-1] + inc)
            path.steps.append(StepDraw(component_jumps=jumps, z_jump=zv))
            descend(depth + 1, prob * p)
            path.positions.pop()
            path.steps.pop()

    descend(0, 1.0)
    return acc.total


# ---------------------------------------------------------------------------
# Ballot conditional by direct walk enumeration
# ---------------------------------------------------------------------------


def ballot_profile(
    increments: IntegerPMF, n: int, budget: int = DEFAULT_BUDGET
) -> Dict[int, Tuple[float, float]]:
    """For every endpoint k, (P(R(n)=k, all partial sums positive), P(R(n)=k))
    by full enumeration of the n-step walk."""
    if increments.support_max > 1:
        raise NotSkipFree("ballot enumeration needs increments <= 1")
    if n < 1:
        raise BadParameter(f"walk length must be >= 1, got {n}")
    entries = list(zip(increments.values, increments.probs))
    worst = len(entries) ** n
    if worst > budget:
        raise BudgetExceeded(required=worst, budget=budget)
    num: Dict[int, _Kahan] = {}
    den: Dict[int, _Kahan] = {}

    def descend(depth: int, total: int, positive: bool, prob: float) -> None:
        if depth == n:
            den.setdefault(total, _Kahan()).add(prob)
            if positive:
                num.setdefault(total, _Kahan()).add(prob)
            return
        for v, p in entries:
            s = total + v
            descend(depth + 1, s, positive and s > 0, prob * p)

    descend(0, 0, True, 1.0)
    out: Dict[int, Tuple[float, float]] = {}
    for k, d in den.items():
        out[k] = (num[k].total if k in num else 0.0, d.total)
    return out


def ballot_conditional(
    increments: IntegerPMF, n: int, k: int, budget: int = DEFAULT_BUDGET
) -> Optional[float]:
    """P(all partial sums positive | R(n) = k) by enumeration.

    Returns None (undefined, distinct from 0) when P(R(n) = k) is 0.
    """
    profile = ballot_profile(increments, n, budget)
    if k not in profile or profile[k][1] == 0.0:
        return None
    num, den = profile[k]
    return num / den


def first_passage_profile(
    increments: IntegerPMF, k: int, n_max: int, budget: int = DEFAULT_BUDGET
) -> Dict[int, float]:
    """P(first passage to level k at time n), n <= n_max, by enumeration.

    Branches are cut once the walk can no longer reach k in the remaining
    steps (increments are capped at +1) and absorbed when it arrives.
    """
    if increments.support_max > 1:
        raise NotSkipFree("first-passage enumeration needs increments <= 1")
    if k < 1:
        raise BadParameter(f"target level must be >= 1, got {k}")
    entries = list(zip(increments.values, increments.probs))
    acc = {n: _Kahan() for n in range(1, n_max + 1)}
    visited = 0

    def descend(depth: int, pos: int, prob: float) -> None:
        nonlocal visited
        if depth == n_max or pos + (n_max - depth) < k:
            return
        for v, p in entries:
            visited += 1
            if visited > budget:
                raise BudgetExceeded(required=visited, budget=budget)
            s = pos + v
            if s == k:
                acc[depth + 1].add(prob * p)
            else:
                descend(depth + 1, s, prob * p)

    descend(0, 0, 1.0)
    return {n: acc[n].total for n in acc}


# ---------------------------------------------------------------------------
# Crossing-event truncations (specialized, strict history)
# ---------------------------------------------------------------------------


def _query_matcher(query: CrossingQuery):
    """Compile a query to a predicate over crossing records."""
    x = query.x
    if query.portfolio_index is None:
        y = query.y

        def match(y_pre, landing, jumps, dc, zj):
            if y_pre != y or landing < x:
                return False
            return (dc >= x + 1 - y and zj == -1) or (dc >= x - y and zj >= 0)

        return match
    idx = query.portfolio_index - 1
    if query.y is None:

        def match(y_pre, landing, jumps, dc, zj):
            return landing >= x and jumps[idx] == x + 1 - y_pre

        return match
    y = query.y

    def match(y_pre, landing, jumps, dc, zj):
        return y_pre == y and landing >= x and jumps[idx] == x + 1 - y

    return match


def _strict_tree_edges(model: RiskModelSpec, horizon: int) -> int:
    """Exact number of edges the strict-crossing enumeration will expand.

    Live prefixes keep every position after time 0 strictly below 0; the
    count is a small integer DP over positions (down-moves are unit steps, so
    positions live in [-t, -1] at time t).
    """
    weights: Dict[int, int] = {}
    for _p, inc, _jumps, _zv in _joint_steps(model):
        weights[inc] = weights.get(inc, 0) + 1
    branching = sum(weights.values())
    live: Dict[int, int] = {0: 1}
    edges = 0
    for _t in range(horizon):
        edges += branching * sum(live.values())
        nxt: Dict[int, int] = {}
        for pos, cnt in live.items():
            for inc, w in weights.items():
                newpos = pos + inc
                if newpos <= -1:
                    nxt[newpos] = nxt.get(newpos, 0) + cnt * w
        live = nxt
        if not live:
            break
    return edges


def crossing_truncation_profile(
    model: RiskModelSpec,
    queries: Sequence[CrossingQuery],
    horizon: int,
    budget: int = DEFAULT_BUDGET,
) -> np.ndarray:
    """Cumulative truncated probabilities, one row per query.

    Row q, column h (0..horizon) is the exact probability that query q's
    event fires with crossing time <= h.  One tree walk serves all queries:
    the strict history condition lets every branch that revisits level 0 be
    dropped for all of them at once.
    """
    if horizon < 1:
        raise BadParameter(f"horizon must be >= 1, got {horizon}")
    for q in queries:
        if q.model != model:
            raise BadParameter("all queries must target the enumerated model")
    required = _strict_tree_edges(model, horizon)
    if required > budget:
        raise BudgetExceeded(required=required, budget=budget)
    joint = _joint_steps(model)
    matchers = [_query_matcher(q) for q in queries]
    nq = len(queries)
    sums = np.zeros((nq, horizon + 1), dtype=np.float64)
    comps = np.zeros((nq, horizon + 1), dtype=np.float64)

    def kadd(qi: int, tau: int, val: float) -> None:
        y = val - comps[qi, tau]
        t = sums[qi, tau] + y
        comps[qi, tau] = (t - sums[qi, tau]) - y
        sums[qi, tau] = t

    def descend(depth: int, pos: int, prob: float) -> None:
        for p, inc, jumps, zv in joint:
            newpos = pos + inc
            branch = prob * p
            if newpos > 0:
                tau = depth + 1
                dc = sum(jumps)
                for qi, match in enumerate(matchers):
                    if match(pos, newpos, jumps, dc, zv):
                        kadd(qi, tau, branch)
            elif newpos <= -1 and depth + 1 < horizon:
                descend(depth + 1, newpos, branch)
            # newpos == 0: the strict history is broken for every query.

    descend(0, 0, 1.0)
    return np.cumsum(sums, axis=1)


def crossing_truncation(
    model: RiskModelSpec,
    query: CrossingQuery,
    horizon: int,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """Exact probability of the query's event restricted to crossings within
    ``horizon``.  Nondecreasing in the horizon and bounded by the closed form."""
    profile = crossing_truncation_profile(model, [query], horizon, budget)
    return float(profile[0, horizon])
