"""Exact ballot-style and first-passage computations for skip-free walks.

Two independent routes to the first-passage law are provided: the classical
hitting-time identity (Kemperman's formula) and a plain forward dynamic
program with an absorbing level.  They must agree entrywise; tests hold them
to 1e-12.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Sequence, Tuple

import numpy as np

from . import pmf as pmflib
from .errors import BadSequence, DomainError, NotSkipFree
from .pmf import IntegerPMF


def ballot_probability(n: int, k: int) -> float:
    """P(all partial sums stay positive | walk of length n ends at k) = k / n.

    Valid for walks whose increments never exceed +1 and are cyclically
    interchangeable; the value does not depend on the increment law.  Returns
    0.0 for k <= 0 (a nonpositive endpoint contradicts positivity at the end).

    Raises:
        DomainError: n < 1, or k > n (unreachable for unit-capped increments).
    """
    if n < 1:
        raise DomainError(f"walk length must be >= 1, got {n}")
    if k > n:
        raise DomainError(
            f"endpoint {k} above walk length {n} is unreachable for increments <= 1"
        )
    if k <= 0:
        return 0.0
    return k / n


@dataclass(frozen=True)
class RotationCertificate:
    """Which rotations of an integer sequence first hit their total sum at the end.

    ``sequence`` has entries >= -1 summing to -k < 0.  ``qualifying_indices``
    holds the 0-based start positions i such that the rotation beginning at
    ``sequence[i]`` keeps every proper prefix sum above -k and first reaches
    -k with the full sum.  Exactly k indices qualify.
    """

    sequence: Tuple[int, ...]
    k: int
    qualifying_indices: FrozenSet[int]


def qualifying_rotations(sequence: Sequence[int]) -> RotationCertificate:
    """Enumerate the rotations whose first visit to the total sum is at the end.

    Raises:
        BadSequence: an entry is below -1, or the sum is not negative.
    """
    seq = tuple(int(x) for x in sequence)
    if not seq:
        raise BadSequence("sequence must be non-empty")
    for x in seq:
        if x < -1:
            raise BadSequence(f"entry {x} is below -1")
    total = sum(seq)
    if total >= 0:
        raise BadSequence(f"sequence sum must be negative, got {total}")
    k = -total
    n = len(seq)
    qualifying = set()
    for start in range(n):
        partial = 0
        hit_early = False
        for j in range(n - 1):
            partial += seq[(start + j) % n]
            if partial <= -k:
                hit_early = True
                break
        if not hit_early:
            qualifying.add(start)
    return RotationCertificate(sequence=seq, k=k, qualifying_indices=frozenset(qualifying))


def _require_upward_skip_free(increments: IntegerPMF) -> None:
    if increments.support_max > 1:
        raise NotSkipFree(
            f"increments reach {increments.support_max} > 1; "
            "first-passage identities need upward skip-free steps"
        )


def kemperman_first_passage_pmf(
    increments: IntegerPMF, k: int, n_max: int
) -> Dict[int, float]:
    """First-passage law of an upward skip-free walk to level k via the
    hitting-time identity n * P(tau(k) = n) = k * P(R(n) = k).

    P(R(n) = k) is read off the n-fold convolution of the increment law, so
    this route never tracks the passage explicitly.

    Raises:
        NotSkipFree: increments have support above +1.
        DomainError: k < 1 or n_max < 1.
    """
    _require_upward_skip_free(increments)
    if k < 1:
        raise DomainError(f"target level must be >= 1, got {k}")
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    out: Dict[int, float] = {}
    law = pmflib.delta(0)
    for n in range(1, n_max + 1):
        law = pmflib.convolve(law, increments)
        out[n] = (k / n) * law.prob_at(k)
    return out


def first_passage_pmf_dp(
    increments: IntegerPMF, k: int, n_max: int
) -> Dict[int, float]:
    """First-passage law to level k by forward dynamic programming.

    The walk's position distribution is propagated step by step with level k
    absorbing; because the increments are upward skip-free the walk can only
    enter k from k - 1 with a +1 step, never overshoot.  No hitting-time
    identity is used anywhere.

    Raises:
        NotSkipFree: increments have support above +1.
        DomainError: k < 1 or n_max < 1.
    """
    _require_upward_skip_free(increments)
    if k < 1:
        raise DomainError(f"target level must be >= 1, got {k}")
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    lo = n_max * min(increments.support_min, 0)
    width = k - lo + 1  # positions lo .. k, absorbing cell at k
    alive = np.zeros(width, dtype=np.float64)
    alive[0 - lo] = 1.0
    steps = list(zip(increments.values, increments.probs))
    out: Dict[int, float] = {}
    for n in range(1, n_max + 1):
        nxt = np.zeros(width, dtype=np.float64)
        for step, p in steps:
            if p == 0.0:
                continue
            if step >= 0:
                nxt[step:] += alive[: width - step] * p
            else:
                nxt[: width + step] += alive[-step:] * p
        out[n] = float(nxt[k - lo])
        nxt[k - lo] = 0.0
        alive = nxt
    return out
