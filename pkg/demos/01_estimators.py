"""
Bernstein estimators on the simplex
===================================

Fit the smoothed c.d.f. and the density estimator to a sample from a
two-component Dirichlet mixture on the 2-simplex, then look at a few of
their basic properties.
"""

import numpy as np

from bernsimplex.estimators import CdfModel, bernstein_cdf, empirical_cdf, eval_density, fit_density
from bernsimplex.simplex import integrate_simplex, sample_mixture
from bernsimplex.targets import ILLUSTRATIVE_MIXTURE, mixture_model

# A sample of 1000 points.  Rows are (x_1, x_2) with x_1 + x_2 <= 1; the
# third coordinate of the composition is implicit.
X = sample_mixture(ILLUSTRATIVE_MIXTURE, 1000, seed=0)
print("sample shape", X.shape)

# The density estimator is a smoothed histogram: bin proportions over a
# lattice of cells of side 1/m, mixed with multinomial weights.
model = fit_density(X, 30)
pts = np.array([[0.2, 0.3], [0.5, 0.2], [0.1, 0.1]])
truth = mixture_model(ILLUSTRATIVE_MIXTURE)
print("f_hat  ", np.round(eval_density(model, pts), 4))
print("f      ", np.round(truth.pdf(pts), 4))

# The same estimator is a finite mixture of Dirichlet densities; both forms
# agree to rounding error.
gap = np.max(np.abs(eval_density(model, pts) - eval_density(model, pts, form="dirichlet")))
print("histogram vs Dirichlet form gap", gap)

# The estimate is a proper density: it integrates to one.  A Gauss rule on
# the simplex is exact for polynomials of this degree.
print("integral of f_hat", integrate_simplex(lambda x: eval_density(model, x), 2, 20, rule="gauss"))

# The smoothed c.d.f. is the Bernstein polynomial of the empirical c.d.f.
cdf = CdfModel(X, 30)
print("F*     ", np.round(bernstein_cdf(cdf, pts), 4))
print("F_n    ", np.round(empirical_cdf(X, pts), 4))
