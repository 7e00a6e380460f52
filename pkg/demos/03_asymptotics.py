"""
Asymptotic error and the optimal order
======================================

Leading bias and variance coefficients give large-sample approximations to
the MSE and MISE, and minimising those over m gives the optimal order.
"""

from bernsimplex.asymptotics import asymptotic_error, cdf_coeffs, density_coeffs, optimal_bandwidth
from bernsimplex.simplex import MixtureSpec
from bernsimplex.targets import ILLUSTRATIVE_MIXTURE, mixture_model, uniform_model

# F(x) = x^2 on [0, 1].  At x=0.5 the c.d.f. bias coefficient is 1/4.
square = mixture_model(MixtureSpec.single([2.0], 1.0))
print("cdf coefficients at 0.5:", cdf_coeffs(square, [0.5]))

# The optimal c.d.f. order grows like n^(2/3).
for n in (10 ** 4, 10 ** 5, 10 ** 6):
    opt = optimal_bandwidth("cdf", "pointwise", square, n, [0.5])
    print(f"n={n:>8d}  m_opt={opt.m_rounded}")

# Density coefficients on the 2-simplex.  The bias of the estimator with
# exact normalisation carries an extra d(d-1)/2 f(x) term, reported as b_norm.
dist = mixture_model(ILLUSTRATIVE_MIXTURE)
print("density coefficients at (0.3, 0.4):", density_coeffs(dist, [0.3, 0.4]))

# Integrated density error: the MISE-optimal order grows like n^(2/(d+4)).
for n in (500, 2000, 8000):
    opt = optimal_bandwidth("density", "integrated", dist, n)
    print(f"n={n:>5d}  m_opt={opt.m_rounded}  predicted MISE={opt.error_at_opt:.4f}")
print(asymptotic_error("density", "integrated", dist, 2000, 30).to_json())

# A uniform target has no smoothing bias, so no finite optimum exists.  The
# outcome is flagged instead of returning a made-up order.
deg = optimal_bandwidth("density", "integrated", uniform_model(2), 1000)
print("uniform target degenerate:", deg.degenerate, "-", deg.reason)
