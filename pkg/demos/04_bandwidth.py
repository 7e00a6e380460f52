"""
Choosing the order by cross-validation
======================================

Least-squares (LSCV) and likelihood (LCV) cross-validation pick m from the
data.  On a simulated sample the choice can be compared with the exact
integrated error, which is available in closed form for Dirichlet mixtures.
"""

import numpy as np

from bernsimplex.bandwidth import select_bandwidth
from bernsimplex.estimators import fit_density
from bernsimplex.montecarlo import ise_exact
from bernsimplex.simplex import sample_mixture
from bernsimplex.targets import ILLUSTRATIVE_MIXTURE

X = sample_mixture(ILLUSTRATIVE_MIXTURE, 2000, seed=3)
grid = list(range(2, 41))

lscv = select_bandwidth(X, grid, "lscv")
lcv = select_bandwidth(X, grid, "lcv")
print("LSCV picks m =", lscv.chosen_m, " LCV picks m =", lcv.chosen_m)

# Exact integrated squared error of every fit on the grid.
ise = np.array([ise_exact(fit_density(X, m), ILLUSTRATIVE_MIXTURE) for m in grid])
best = grid[int(np.argmin(ise))]
print("ISE-optimal m =", best)
for name, res in (("LSCV", lscv), ("LCV", lcv)):
    print(f"{name}: ISE ratio to the grid minimum {ise[grid.index(res.chosen_m)] / ise.min():.3f}")
