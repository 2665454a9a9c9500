"""Exact integer distributions: tables, families, convolution, truncation.

Everything downstream (simulation, enumeration, closed forms) runs on these
finite tables, so this is the best place to see how mass is accounted for.
"""

from skipfree import (
    claim_table,
    convolve,
    delta,
    expectation,
    geometric_claim,
    make_pmf,
    poisson_claim,
    power_convolve,
)

# Explicit tables: duplicates merge, mass must close to 1.
p = make_pmf([(0, 0.3), (0, 0.2), (2, 0.5)])
print("merged table:", dict(zip(p.values, p.probs)))

# Convolution is the law of independent sums; delta(0) is its unit.
fair = make_pmf([(0, 0.5), (1, 0.5)])
print("two coins:", dict(zip(*(lambda q: (q.values, q.probs))(convolve(fair, fair)))))
print("delta identity:", convolve(delta(0), p).values == p.values)

# Repeated self-convolution: a 4-step walk of fair coin claims.
walk4 = power_convolve(fair, 4)
print("P(4-coin total = 2) =", walk4.prob_at(2), "(binomial 6/16)")

# Infinite families become finite tables with the cut mass recorded.
geo = geometric_claim(0.5, tail_tol=1e-12)
print("geometric(0.5): support 0..%d, tail mass %.3e" % (geo.dist.support_max, geo.dist.tail_mass))
print("truncated mean:", expectation(geo.dist), "(full-family mean is exactly 1)")

# Tail lookups on claims add the recorded truncation mass back in, so
# P(C >= 2) is the exact a^2 despite the finite table.
print("P(C >= 2) =", geo.tail_from(2))

poi = poisson_claim(0.7, tail_tol=1e-10)
print("poisson(0.7): %d entries, tail %.2e" % (len(poi.dist.values), poi.dist.tail_mass))
