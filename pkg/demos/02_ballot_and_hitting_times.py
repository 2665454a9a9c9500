"""Ballot probabilities, rotation certificates, and first-passage laws.

Three independent routes to the same first-passage quantities: a closed-form
identity, a plain dynamic program, and (in demo 04) exhaustive enumeration.
"""

from skipfree import (
    ballot_probability,
    first_passage_pmf_dp,
    kemperman_first_passage_pmf,
    make_pmf,
    qualifying_rotations,
)
from skipfree import oracle

# The ballot value k/n does not depend on the increment probabilities, only
# on the endpoint.  Enumeration confirms it for an asymmetric law.
asym = make_pmf([(-1, 0.3), (0, 0.3), (1, 0.4)])
for n, k in [(3, 1), (6, 2), (9, 3)]:
    enumerated = oracle.ballot_conditional(asym, n, k)
    print(f"P(stay positive | end at {k} after {n}) = {enumerated:.6f}  closed form {ballot_probability(n, k):.6f}")

# The combinatorial engine underneath: of all rotations of a sequence with
# entries >= -1 summing to -k, exactly k first reach -k at the very end.
for seq in [(-1, -1, -1), (1, -1, -1), (0, -1, 1, -1), (2, -1, -1, -1, -1)]:
    cert = qualifying_rotations(seq)
    print(f"rotations of {seq}: deficit {cert.k}, qualifying starts {sorted(cert.qualifying_indices)}")

# First passage to level k for an upward skip-free walk: the hitting-time
# identity n P(tau = n) = k P(R(n) = k) against a forward DP with absorption.
steps = make_pmf([(-1, 0.5), (1, 0.5)])
identity = kemperman_first_passage_pmf(steps, 1, 9)
direct = first_passage_pmf_dp(steps, 1, 9)
print("\n n   identity       dynamic program")
for n in range(1, 10):
    print(f"{n:2d}   {identity[n]:.10f}   {direct[n]:.10f}")
print("max gap:", max(abs(identity[n] - direct[n]) for n in identity))
