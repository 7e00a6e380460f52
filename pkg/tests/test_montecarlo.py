import csv
import io
import json
import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from bernsimplex.asymptotics import DegenerateBandwidthError
from bernsimplex.estimators import CdfModel, bernstein_cdf, eval_density, fit_density
from bernsimplex.montecarlo import (
    CSV_COLUMNS,
    PreconditionError,
    StudyConfig,
    _flat,
    cdf_moments_1d,
    cdf_point_tables,
    density_moments,
    density_point_tables,
    fit_loglog,
    ise_exact,
    ise_quadrature,
    mise_exact,
    run_study,
    target_square_integral,
)
from bernsimplex.simplex import MixtureSpec, bin_index, ceil_index, integrate_simplex, sample_mixture
from bernsimplex.targets import ILLUSTRATIVE_MIXTURE, mixture_model, uniform_model

SQUARE = {"components": [{"weight": 1.0, "alpha": [2.0], "beta": 1.0}]}
UNIFORM1 = {"components": [{"weight": 1.0, "alpha": [1.0], "beta": 1.0}]}
BIMODAL1 = {"components": [{"weight": 0.5, "alpha": [2.0], "beta": 5.0},
                           {"weight": 0.5, "alpha": [6.0], "beta": 2.0}]}


# --- fast evaluation tables --------------------------------------------------

@pytest.mark.parametrize("d,m", [(1, 30), (2, 12)])
def test_point_tables_match_estimators(d, m):
    spec = MixtureSpec.uniform(d)
    data = sample_mixture(spec, 300, 5)
    pts = np.random.default_rng(1).dirichlet(np.ones(d + 1), 7)[:, :d]
    U = cdf_point_tables(m, pts)
    fast = U[:, _flat(ceil_index(data, m), m + 1)].mean(axis=1)
    np.testing.assert_allclose(fast, bernstein_cdf(CdfModel(data, m), pts), atol=1e-14)
    W = density_point_tables(m, pts)
    fast = W[:, _flat(bin_index(data, m), m)].mean(axis=1)
    np.testing.assert_allclose(fast, eval_density(fit_density(data, m), pts), rtol=1e-12)


# --- exact moments -----------------------------------------------------------

def test_cdf_moments_vs_single_observation_quadrature():
    # with n = 1 the estimator is g(X) = sum_k 1{X <= k/m} P_k(x); integrate g and g^2 against f
    dist = mixture_model(MixtureSpec.from_dict(BIMODAL1))
    m, x = 9, 0.4
    from scipy.stats import binom
    P = binom.pmf(np.arange(m + 1), m, x)
    pdf = lambda t: float(dist.pdf(np.array([[t]]))[0])
    g = lambda t: P[math.ceil(t * m - 1e-12):].sum()
    pieces = [(k / m, (k + 1) / m) for k in range(m)]
    e1 = sum(integrate.quad(lambda t: g(t) * pdf(t), a + 1e-14, b)[0] for a, b in pieces)
    e2 = sum(integrate.quad(lambda t: g(t) ** 2 * pdf(t), a + 1e-14, b)[0] for a, b in pieces)
    mean, nvar = cdf_moments_1d(dist, m, np.array([x]))
    assert mean[0] == pytest.approx(e1, rel=1e-9)
    assert nvar[0] == pytest.approx(e2 - e1 ** 2, rel=1e-8)


def test_density_moments_vs_quadrature():
    dist = mixture_model(MixtureSpec.from_dict(BIMODAL1))
    m, x = 8, np.array([[0.35]])
    w = density_point_tables(m, x)[0]
    pdf = lambda t: float(dist.pdf(np.array([[t]]))[0])
    c = np.array([integrate.quad(pdf, k / m, (k + 1) / m)[0] for k in range(m)])
    mean, nvar = density_moments(dist, m, x)
    assert mean[0] == pytest.approx(w @ c, rel=1e-10)
    assert nvar[0] == pytest.approx((w ** 2) @ c - (w @ c) ** 2, rel=1e-10)


def test_density_moments_vs_monte_carlo():
    dist = mixture_model(ILLUSTRATIVE_MIXTURE)
    m, n, R = 10, 200, 400
    x = np.array([[0.3, 0.4]])
    mean, nvar = density_moments(dist, m, x)
    W = density_point_tables(m, x)[0]
    est = np.array([W[_flat(bin_index(sample_mixture(ILLUSTRATIVE_MIXTURE, n, r), m), m)].mean() for r in range(R)])
    se = math.sqrt(nvar[0] / n / R)
    assert abs(est.mean() - mean[0]) <= 4 * se


# --- ISE / MISE --------------------------------------------------------------

def dblquad_simplex(fn):
    """Adaptive quadrature over the triangle; copes with integrable face singularities."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.dblquad(lambda y, x: fn(np.array([[x, y]]))[0], 0, 1, 0, lambda x: 1 - x,
                                 epsabs=1e-9, epsrel=1e-7)[0]


def test_target_square_integral_vs_quadrature():
    spec = MixtureSpec.from_dict(BIMODAL1)
    dist = mixture_model(spec)
    assert target_square_integral(spec) == pytest.approx(integrate.quad(lambda t: dist.pdf(np.array([[t]]))[0] ** 2,
                                                                        0, 1)[0], rel=1e-10)
    # beta < 1: the density blows up on the face but its square stays integrable
    dist = mixture_model(ILLUSTRATIVE_MIXTURE)
    assert target_square_integral(ILLUSTRATIVE_MIXTURE) == pytest.approx(dblquad_simplex(lambda x: dist.pdf(x) ** 2), rel=1e-6)
    assert target_square_integral(MixtureSpec.single([0.4], 1.0)) == math.inf


def test_ise_exact_vs_quadrature():
    spec = MixtureSpec.from_dict(BIMODAL1)
    dist = mixture_model(spec)
    model = fit_density(sample_mixture(spec, 300, 3), 15)
    assert ise_exact(model, spec) == pytest.approx(ise_quadrature(model, dist, 4000), rel=1e-5)
    dist = mixture_model(ILLUSTRATIVE_MIXTURE)
    model = fit_density(sample_mixture(ILLUSTRATIVE_MIXTURE, 300, 3), 12)
    want = dblquad_simplex(lambda x: (eval_density(model, x) - dist.pdf(x)) ** 2)
    assert ise_exact(model, ILLUSTRATIVE_MIXTURE) == pytest.approx(want, rel=1e-5)


def test_mise_exact_decomposition_vs_quadrature():
    # integrated variance and squared bias recomputed pointwise and integrated
    spec = MixtureSpec.from_dict(BIMODAL1)
    dist = mixture_model(spec)
    n, m = 500, 12
    res = mise_exact(dist, n, m)
    xs = (np.arange(4000) + 0.5) / 4000
    mean, nvar = density_moments(dist, m, xs[:, None])
    f = dist.pdf(xs[:, None])
    assert res["integrated_variance"] == pytest.approx(np.mean(nvar) / n, rel=1e-5)
    assert res["integrated_bias_sq"] == pytest.approx(np.mean((mean - f) ** 2), rel=1e-5)


def test_mise_exact_vs_monte_carlo():
    spec = MixtureSpec.from_dict(BIMODAL1)
    dist = mixture_model(spec)
    n, m, R = 200, 10, 300
    ise = np.array([ise_exact(fit_density(sample_mixture(spec, n, r), m), spec) for r in range(R)])
    se = ise.std(ddof=1) / math.sqrt(R)
    assert abs(ise.mean() - mise_exact(dist, n, m)["mise"]) <= 4 * se


def test_fit_loglog():
    ns = [100, 200, 400, 800]
    slope, se, icpt = fit_loglog(ns, [3 * n ** -0.8 for n in ns])
    assert slope == pytest.approx(-0.8, abs=1e-12) and se == pytest.approx(0.0, abs=1e-10)
    with pytest.raises(ValueError):
        fit_loglog([100, 100, 200, 400], [1, 2, 3, 4])


# --- configuration -----------------------------------------------------------

def test_config_validation():
    base = dict(study="pointwise", kind="cdf", target=SQUARE, n_values=[100], m=5, points=[[0.5]])
    StudyConfig(**base)
    for bad in (dict(n_values=[5]), dict(replicates=1), dict(m=None), dict(points=None),
                dict(study="other"), dict(kind="pdf"), dict(m_rule="magic"), dict(points=[[0.2, 0.3]])):
        with pytest.raises(ValueError):
            StudyConfig(**{**base, **bad})
    with pytest.raises(PreconditionError):
        StudyConfig(**{**base, "kind": "density", "points": [[0.0]]})
    with pytest.raises(ValueError):
        StudyConfig(**{**base, "m_rule": "power"})
    StudyConfig(**{**base, "study": "consistency", "replicates": 1, "points": None})


def test_config_json_roundtrip():
    cfg = StudyConfig("pointwise", "density", ILLUSTRATIVE_MIXTURE, [100, 200], m=7, points=[[0.3, 0.4]], seed=9)
    back = StudyConfig.from_json(cfg.to_json())
    assert back == cfg
    with pytest.raises(ValueError):
        StudyConfig.from_dict({**cfg.to_dict(), "colour": "red"})


def test_m_rules():
    cfg = StudyConfig("consistency", "cdf", SQUARE, [1000], m_rule="power", m_exponent=1.0)
    assert cfg.m_for(1000) == 1000
    cfg = StudyConfig("consistency", "density", SQUARE, [1000], m_rule="power", m_exponent=1 / 3)
    assert cfg.m_for(1000) == 10
    cfg = StudyConfig("mise", "density", BIMODAL1, [1000], m_rule="m_opt")
    assert cfg.m_for(1000) >= 2
    cfg = StudyConfig("mise", "density", UNIFORM1, [1000], m_rule="m_opt")
    with pytest.raises(DegenerateBandwidthError):
        cfg.m_for(1000)


# --- studies -----------------------------------------------------------------

def test_pointwise_cdf_study_small():
    cfg = StudyConfig("pointwise", "cdf", SQUARE, [2000], m=50, points=[[0.5], [0.3]], replicates=400, seed=1)
    rep = run_study(cfg, workers=2)
    for x in (0.5, 0.3):
        r = rep.row("scaled_var", x=x)
        assert abs(r["z_exact"]) <= 4
        r = rep.row("mean", x=x)
        assert abs(r["z_exact"]) <= 4
    assert rep.row("scaled_bias", x=0.5)["exact"] == pytest.approx(0.25, abs=1e-12)
    for r in rep.rows:
        assert r["se"] is not None and r["se"] >= 0


def test_pointwise_density_uniform_2d_bias():
    # b vanishes for the uniform law; the normalised coefficient is f = 2
    cfg = StudyConfig("pointwise", "density", MixtureSpec.uniform(2), [1000], m=10,
                      points=[[1 / 3, 1 / 3]], replicates=300, seed=4)
    rep = run_study(cfg)
    r = rep.row("scaled_bias")
    assert r["theory"] == pytest.approx(2.0)
    assert abs(r["z_exact"]) <= 4
    assert rep.row("scaled_var")["value"] > 0


def test_pointwise_density_variance_matches_exact_moments():
    # f = 2x, x = 1/2, m = 25: the MC variance agrees with the exact finite-sample value
    cfg = StudyConfig("pointwise", "density", SQUARE, [10 ** 4], m=25, points=[[0.5]], replicates=2000, seed=0)
    rep = run_study(cfg)
    r = rep.row("scaled_var")
    assert abs(r["z_exact"]) <= 3
    assert r["theory"] == pytest.approx(1 / math.sqrt(math.pi), rel=1e-12)


def test_pointwise_deterministic_across_workers():
    cfg = StudyConfig("pointwise", "cdf", SQUARE, [500], m=20, points=[[0.4]], replicates=50, seed=3)
    assert run_study(cfg, workers=1).to_json() == run_study(cfg, workers=3).to_json()


def test_report_csv():
    cfg = StudyConfig("pointwise", "density", ILLUSTRATIVE_MIXTURE, [200], m=6, points=[[0.3, 0.4]], replicates=20)
    rep = run_study(cfg)
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    assert tuple(rows[0].keys()) == CSV_COLUMNS
    assert len(rows) == len(rep.rows)
    assert rows[0]["x"] == "0.3;0.4"
    json.loads(rep.to_json())


def test_mise_study_degenerate_uniform():
    cfg = StudyConfig("mise", "density", UNIFORM1, [100, 200, 400, 800], m_rule="m_opt")
    with pytest.raises(DegenerateBandwidthError):
        run_study(cfg)


def test_mise_study_needs_four_sizes():
    cfg = StudyConfig("mise", "density", BIMODAL1, [100, 200, 400], m_rule="m_opt")
    with pytest.raises(ValueError):
        run_study(cfg)


def test_mise_study_small():
    cfg = StudyConfig("mise", "density", BIMODAL1, [2 ** k for k in range(8, 12)], m_rule="m_opt",
                      replicates=20, seed=2)
    rep = run_study(cfg)
    for r in rep.rows:
        assert abs(r["z_exact"]) <= 4
    s = rep.summary
    assert s["theory_slope"] == pytest.approx(-0.8)
    assert s["m_values"] == sorted(s["m_values"])
    assert abs(s["slope"] - s["exact_slope"]) <= 4 * s["slope_se"] + 0.05


def test_normality_preconditions():
    with pytest.raises(PreconditionError):
        run_study(StudyConfig("normality", "cdf", SQUARE, [100], m=10, points=[[0.0]], replicates=10))
    with pytest.raises(PreconditionError):
        run_study(StudyConfig("normality", "density", SQUARE, [20], m=30, points=[[0.5]], replicates=10))


def test_normality_density_variance_ratio_matches_exact():
    cfg = StudyConfig("normality", "density", UNIFORM1, [10 ** 4], m=49, points=[[0.5]], replicates=1000, seed=6)
    rep = run_study(cfg)
    r = rep.row("variance_ratio")
    assert abs(r["z_exact"]) <= 3
    assert rep.row("ks_distance")["value"] < 0.1


def test_consistency_study_small_and_deterministic():
    cfg = StudyConfig("consistency", "density", SQUARE, [100, 1000, 10000], m_rule="power",
                      m_exponent=1 / 3, replicates=3, seed=1)
    a = run_study(cfg)
    assert a.summary["sup_error_truth"]["strictly_decreasing"]
    one = StudyConfig("consistency", "cdf", SQUARE, [500], m=500, replicates=1, seed=8)
    assert run_study(one).to_json() == run_study(one).to_json()
    assert run_study(one).rows[0]["se"] is None
