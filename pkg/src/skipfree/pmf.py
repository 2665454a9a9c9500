"""Exact arithmetic on finite-support integer probability mass functions.

Probabilities are plain 64-bit floats; identity-style checks downstream use
tolerances around 1e-12 instead of rational arithmetic.  Infinite families
(geometric, Poisson) are truncated to explicit finite tables and the discarded
upper-tail mass is recorded in ``tail_mass`` so downstream sums stay auditable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Tuple

from .errors import BadParameter, MassNotOne, NegativeProbability

# Mass accounting must close to within this band at every construction.
MASS_TOLERANCE = 1e-12

# Convolution entries smaller than this are folded into tail_mass so that
# repeated self-convolution cannot blow up the support with denormal noise.
MIN_ENTRY_PROB = 1e-300

DEFAULT_TAIL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class IntegerPMF:
    """Finite-support probability mass function over the integers.

    ``values`` are strictly increasing, ``probs`` are nonnegative, and
    ``sum(probs) + tail_mass`` is 1 up to :data:`MASS_TOLERANCE`.  Instances
    are immutable and safe to share between threads.
    """

    values: Tuple[int, ...]
    probs: Tuple[float, ...]
    tail_mass: float = 0.0

    def __post_init__(self):
        _validate_entries(self.values, self.probs, self.tail_mass)

    @property
    def support_min(self) -> int:
        return self.values[0]

    @property
    def support_max(self) -> int:
        return self.values[-1]

    def prob_at(self, value: int) -> float:
        """P(X = value); 0.0 outside the retained support."""
        return _index(self).get(value, 0.0)

    def upper_tail_from(self, value: int) -> float:
        """Sum of retained entry mass at or above ``value`` (tail_mass excluded)."""
        return math.fsum(p for v, p in zip(self.values, self.probs) if v >= value)

    def entries(self) -> Tuple[Tuple[int, float], ...]:
        return tuple(zip(self.values, self.probs))


@lru_cache(maxsize=None)
def _index(pmf: IntegerPMF) -> Mapping[int, float]:
    return dict(zip(pmf.values, pmf.probs))


def _validate_entries(values, probs, tail_mass) -> None:
    """Shared validator run by every constructor path."""
    if len(values) == 0:
        raise BadParameter("a PMF needs at least one entry")
    if len(values) != len(probs):
        raise BadParameter("values and probs must have equal length")
    for p in probs:
        if p < 0.0:
            raise NegativeProbability(f"probability {p!r} is negative")
    if tail_mass < 0.0:
        raise NegativeProbability(f"tail_mass {tail_mass!r} is negative")
    for a, b in zip(values, values[1:]):
        if a >= b:
            raise BadParameter("values must be strictly increasing with no duplicates")
    total = math.fsum(probs) + tail_mass
    if abs(total - 1.0) > MASS_TOLERANCE:
        raise MassNotOne(f"total mass {total!r} deviates from 1 beyond {MASS_TOLERANCE}")


@dataclass(frozen=True)
class ClaimPMF:
    """Increment law of a nondecreasing claims walk: support on {0, 1, 2, ...}.

    Truncated families park their discarded mass in the upper tail, so tail
    probabilities add ``tail_mass`` back in.
    """

    dist: IntegerPMF

    def __post_init__(self):
        if self.dist.support_min < 0:
            raise BadParameter(
                f"claim increments must be nonnegative, found {self.dist.support_min}"
            )

    def prob_at(self, value: int) -> float:
        return self.dist.prob_at(value)

    def tail_from(self, value: int) -> float:
        """P(C >= value), counting the truncated upper-tail mass."""
        if value <= self.dist.support_min:
            return 1.0
        return self.dist.upper_tail_from(value) + self.dist.tail_mass

    @property
    def mean(self) -> float:
        return expectation(self.dist)


@dataclass(frozen=True)
class PerturbationPMF:
    """Increment law of an upwards skip-free perturbation walk: support <= +1.

    Any truncated mass lives in the lower tail (values below the retained
    support), so upper-tail lookups use the retained entries only.
    """

    dist: IntegerPMF

    def __post_init__(self):
        if self.dist.support_max > 1:
            raise BadParameter(
                f"perturbation increments must not exceed 1, found {self.dist.support_max}"
            )

    def prob_at(self, value: int) -> float:
        return self.dist.prob_at(value)

    def tail_from(self, value: int) -> float:
        """P(Z >= value) over the retained support."""
        return self.dist.upper_tail_from(value)

    @property
    def mean(self) -> float:
        return expectation(self.dist)


def make_pmf(entries: Iterable[Tuple[int, float]]) -> IntegerPMF:
    """Build an exact PMF from (value, probability) pairs.

    Duplicate values are merged by summing their probabilities.  The result is
    normalized by the (validated) total so downstream mass accounting starts
    from exactly 1.

    Raises:
        NegativeProbability: some probability is below 0.
        MassNotOne: the total deviates from 1 beyond 1e-12.
        BadParameter: no entries were given.
    """
    merged: dict[int, float] = {}
    for value, prob in entries:
        if prob < 0.0:
            raise NegativeProbability(f"probability {prob!r} for value {value} is negative")
        merged[int(value)] = merged.get(int(value), 0.0) + float(prob)
    if not merged:
        raise BadParameter("a PMF needs at least one entry")
    total = math.fsum(merged.values())
    if abs(total - 1.0) > MASS_TOLERANCE:
        raise MassNotOne(f"entry mass sums to {total!r}, not 1")
    values = tuple(sorted(merged))
    probs = tuple(merged[v] / total for v in values)
    return IntegerPMF(values=values, probs=probs, tail_mass=0.0)


def delta(value: int) -> IntegerPMF:
    """Point mass at ``value``."""
    return IntegerPMF(values=(int(value),), probs=(1.0,), tail_mass=0.0)


def expectation(pmf: IntegerPMF) -> float:
    """Mean over the retained support; truncated tail mass is excluded."""
    return math.fsum(v * p for v, p in zip(pmf.values, pmf.probs))


def variance(pmf: IntegerPMF) -> float:
    """Second central moment over the retained support."""
    m = expectation(pmf)
    return math.fsum(p * (v - m) ** 2 for v, p in zip(pmf.values, pmf.probs))


def convolve(a: IntegerPMF, b: IntegerPMF) -> IntegerPMF:
    """Law of the sum of independent draws from ``a`` and ``b``.

    Tail masses add; entry products below :data:`MIN_ENTRY_PROB` are folded
    into the tail as well.
    """
    acc: dict[int, float] = {}
    for va, pa in zip(a.values, a.probs):
        for vb, pb in zip(b.values, b.probs):
            v = va + vb
            acc[v] = acc.get(v, 0.0) + pa * pb
    tail = a.tail_mass + b.tail_mass
    values = []
    probs = []
    for v in sorted(acc):
        p = acc[v]
        if p < MIN_ENTRY_PROB:
            tail += p
        else:
            values.append(v)
            probs.append(p)
    if not values:
        # All mass fell below the floor; keep a zero-probability anchor.
        values, probs = [0], [0.0]
    return IntegerPMF(values=tuple(values), probs=tuple(probs), tail_mass=tail)


def power_convolve(pmf: IntegerPMF, n: int) -> IntegerPMF:
    """n-fold self-convolution via exponentiation by squaring; n = 0 is delta(0)."""
    if n < 0:
        raise BadParameter(f"convolution power must be >= 0, got {n}")
    result = delta(0)
    base = pmf
    k = n
    while k > 0:
        if k & 1:
            result = convolve(result, base)
        k >>= 1
        if k:
            base = convolve(base, base)
    return result


def negated(pmf: IntegerPMF) -> IntegerPMF:
    """Law of -X."""
    values = tuple(-v for v in reversed(pmf.values))
    probs = tuple(reversed(pmf.probs))
    return IntegerPMF(values=values, probs=probs, tail_mass=pmf.tail_mass)


def shifted(pmf: IntegerPMF, offset: int) -> IntegerPMF:
    """Law of X + offset."""
    return IntegerPMF(
        values=tuple(v + offset for v in pmf.values),
        probs=pmf.probs,
        tail_mass=pmf.tail_mass,
    )


def geometric_claim(a: float, tail_tol: float = DEFAULT_TAIL_TOLERANCE) -> ClaimPMF:
    """Geometric claim sizes P(C = k) = (1 - a) a^k, truncated at tail <= tail_tol.

    The cut happens at the smallest K with a^(K+1) <= tail_tol, and that exact
    remainder is recorded as tail_mass.
    """
    if not 0.0 <= a < 1.0:
        raise BadParameter(f"geometric ratio must lie in [0, 1), got {a!r}")
    if tail_tol <= 0.0:
        raise BadParameter(f"truncation tolerance must be positive, got {tail_tol!r}")
    if a == 0.0:
        return ClaimPMF(delta(0))
    # Tail after K is a^(K+1); find the smallest admissible K.
    cutoff = max(0, math.ceil(math.log(tail_tol) / math.log(a)) - 1)
    while a ** (cutoff + 1) > tail_tol:
        cutoff += 1
    while cutoff > 0 and a**cutoff <= tail_tol:
        cutoff -= 1
    values = tuple(range(cutoff + 1))
    probs = tuple((1.0 - a) * a**k for k in values)
    return ClaimPMF(IntegerPMF(values=values, probs=probs, tail_mass=a ** (cutoff + 1)))


def poisson_claim(rate: float, tail_tol: float = DEFAULT_TAIL_TOLERANCE) -> ClaimPMF:
    """Poisson(rate) claim sizes truncated at the smallest K with tail <= tail_tol."""
    if rate < 0.0:
        raise BadParameter(f"poisson rate must be >= 0, got {rate!r}")
    if tail_tol <= 0.0:
        raise BadParameter(f"truncation tolerance must be positive, got {tail_tol!r}")
    if rate == 0.0:
        return ClaimPMF(delta(0))
    probs = [math.exp(-rate)]
    while 1.0 - math.fsum(probs) > tail_tol:
        k = len(probs)
        probs.append(probs[-1] * rate / k)
        if k > 10_000_000:  # pragma: no cover - guards absurd rates
            raise BadParameter(f"poisson rate {rate!r} needs an unreasonable table")
    tail = max(0.0, 1.0 - math.fsum(probs))
    return ClaimPMF(
        IntegerPMF(values=tuple(range(len(probs))), probs=tuple(probs), tail_mass=tail)
    )


def claim_table(entries: Iterable[Tuple[int, float]]) -> ClaimPMF:
    """Exact claim law from an explicit table (support must be nonnegative)."""
    return ClaimPMF(make_pmf(entries))


def perturbation_table(entries: Iterable[Tuple[int, float]]) -> PerturbationPMF:
    """Exact perturbation law from an explicit table (support must be <= 1)."""
    return PerturbationPMF(make_pmf(entries))


def family_pmf(descriptor: Mapping, role: str = "claim") -> ClaimPMF | PerturbationPMF:
    """Build a claim or perturbation law from a family descriptor.

    Descriptors are plain mappings, the same shape the CLI config uses::

        {"family": "table", "entries": [[0, 0.8], [2, 0.2]]}
        {"family": "geometric", "a": 0.5, "tail_tol": 1e-12}
        {"family": "poisson", "rate": 0.7, "tail_tol": 1e-12}

    ``role`` selects the wrapper ("claim" or "perturbation") and with it the
    support constraint that gets enforced.
    """
    if role not in ("claim", "perturbation"):
        raise BadParameter(f"unknown role {role!r}")
    family = descriptor.get("family")
    if family == "table":
        entries = descriptor.get("entries")
        if not entries:
            raise BadParameter("table family needs a non-empty 'entries' list")
        pairs = [(int(v), float(p)) for v, p in entries]
        return claim_table(pairs) if role == "claim" else perturbation_table(pairs)
    if family == "geometric":
        built = geometric_claim(
            float(descriptor["a"]),
            float(descriptor.get("tail_tol", DEFAULT_TAIL_TOLERANCE)),
        )
    elif family == "poisson":
        built = poisson_claim(
            float(descriptor["rate"]),
            float(descriptor.get("tail_tol", DEFAULT_TAIL_TOLERANCE)),
        )
    else:
        raise BadParameter(f"unknown family {family!r}")
    if role == "perturbation":
        return PerturbationPMF(built.dist)
    return built
