"""
Small simulation studies
========================

The study harness runs seeded Monte Carlo experiments and reports every
empirical quantity with its standard error, the asymptotic prediction and,
where available, the exact finite-sample value.
"""

from bernsimplex.montecarlo import StudyConfig, run_study

square = {"components": [{"weight": 1.0, "alpha": [2.0], "beta": 1.0}]}

# Pointwise bias and variance of the smoothed c.d.f. of F(x) = x^2.
cfg = StudyConfig(study="pointwise", kind="cdf", target=square, n_values=[2000], m=40,
                  points=[[0.3], [0.5]], replicates=2000, seed=1)
print(run_study(cfg).to_csv())

# MISE of the density estimator at the optimal order along a ladder of n.
# The fitted log-log slope should be close to -4/5 in one dimension.
mixture = {"components": [{"weight": 0.5, "alpha": [2.0], "beta": 5.0},
                          {"weight": 0.5, "alpha": [6.0], "beta": 2.0}]}
cfg = StudyConfig(study="mise", kind="density", target=mixture, n_values=[256, 512, 1024, 2048, 4096],
                  m_rule="m_opt", replicates=100, seed=2)
rep = run_study(cfg)
print("slope", round(rep.summary["slope"], 3), "theory", rep.summary["theory_slope"],
      "exact", round(rep.summary["exact_slope"], 3))

# Standardised c.d.f. estimates are close to standard normal.
uniform = {"components": [{"weight": 1.0, "alpha": [1.0], "beta": 1.0}]}
cfg = StudyConfig(study="normality", kind="cdf", target=uniform, n_values=[2000], m=200,
                  points=[[0.5]], replicates=1000, seed=3)
print("KS distance", round(run_study(cfg).summary["max_ks"], 4))
