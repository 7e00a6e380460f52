"""Bernstein c.d.f. and density estimators on the d-dimensional unit simplex."""

from .asymptotics import (
    AsymptoticReport,
    BandwidthOptimum,
    BoundarySingularityError,
    DegenerateBandwidthError,
    asymptotic_error,
    bandwidth_equivalence,
    cdf_coeffs,
    density_coeffs,
    optimal_bandwidth,
    psi,
)
from .bandwidth import SelectionResult, lcv_score, loo_density, lscv_score, select_bandwidth
from .estimators import (
    CdfModel,
    DensityModel,
    bernstein_cdf,
    bernstein_poly,
    empirical_cdf,
    eval_density,
    fit_density,
)
from .simplex import (
    MixtureSpec,
    SimplexError,
    bin_index,
    dirichlet_log_density,
    dirichlet_moment_integral,
    enumerate_lattice,
    integrate_simplex,
    make_rng,
    multinomial_log_pmf,
    sample_mixture,
)
from .targets import DistributionModel, finite_difference_model, mixture_model, uniform_model

__version__ = "0.1.0"
