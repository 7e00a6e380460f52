"""
Checking the multinomial identities and limits
==============================================

The asymptotic theory rests on a handful of exact identities and limits
for multinomial probabilities.  Each check below compares a computed value
with its closed form or its limit.
"""

import math

from bernsimplex.verification import (
    check_multinomial_identities,
    min_coordinate_limit,
    min_coordinate_sum,
    pmf_power_sum,
    run_default_sweep,
    squared_pmf_integral,
    summarize,
)

# Mean and variance identities of the multinomial law hold to rounding error.
mean, var = check_multinomial_identities(30, 3, [0.2, 0.3, 0.1])
print("mean identity", mean.computed, "variance identity", var.computed)

# The integral over the simplex of the summed squared probabilities has a
# closed form in Gamma functions.  For r=1 and d=1 it is 2/3.
res = squared_pmf_integral(1, 1)
print("r=1, d=1:", res["exact"], res["closed_form"], 2 / 3)

# Scaled power sums approach the variance constant psi(x).
x = [1 / 3, 1 / 3]
for r in (50, 100, 200):
    out = pmf_power_sum(r, 2, x)
    print(f"r={r:4d}  scaled sum {out['scaled_sum']:.5f}  limit {out['limit']:.5f}")

# The min-coordinate sum stays inside [-1, 1] and tends to -sqrt(x(1-x)/pi).
print("R(500, 0.5) =", min_coordinate_sum(0, 500, [0.5]), "limit", min_coordinate_limit(0.5),
      "check", -math.sqrt(0.25 / math.pi))

# The default sweep runs every check over a grid of parameters.
print(summarize(run_default_sweep(workers=1, seed=0)))
