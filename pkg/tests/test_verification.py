import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from bernsimplex.simplex import SimplexError
from bernsimplex.verification import (
    LemmaCheckReport,
    bernstein_tail_bound,
    check_multinomial_identities,
    check_power_sum,
    covariance_determinants,
    gaussian_limit_density,
    min_coordinate_limit,
    min_coordinate_sum,
    pmf_power_sum,
    run_default_sweep,
    squared_pmf_integral,
    summarize,
)


def brute_min_sum(r, x):
    """Literal double sum over the binomial lattice in exact rationals."""
    x = Fraction(x)
    p = [math.comb(r, k) * x ** k * (1 - x) ** (r - k) for k in range(r + 1)]
    total = sum((Fraction(min(k, l), r) - x) * p[k] * p[l] for k in range(r + 1) for l in range(r + 1))
    return math.sqrt(r) * float(total)


def brute_min_sum_2d(i, r, x):
    """Double sum over the 2-d lattice (only coordinate i enters the summand)."""
    from bernsimplex.simplex import enumerate_lattice, multinomial_log_pmf_table
    lat = enumerate_lattice(r, 2)
    p = np.exp(multinomial_log_pmf_table(r, np.array(x), lat)[0])
    k = lat[:, i]
    mins = np.minimum(k[:, None], k[None, :]) / r - x[i]
    return math.sqrt(r) * float(p @ mins @ p)


def test_identity_examples():
    mean, var = check_multinomial_identities(10, 1, [0.3])
    assert mean.computed <= 1e-14 and mean.passed
    mean, var = check_multinomial_identities(30, 3, [0.2, 0.3, 0.1])
    assert var.computed <= 1e-12 and var.passed
    # m=1, d=1: sum (k - x)^2 P = x^2 (1-x) + (1-x)^2 x = x(1-x)
    _, var = check_multinomial_identities(1, 1, [0.3])
    assert var.computed <= 1e-16


def test_identity_fuzz():
    rng = np.random.default_rng(11)
    for _ in range(100):
        d = int(rng.integers(1, 4))
        m = int(rng.integers(1, 41))
        x = rng.dirichlet(np.ones(d + 1))[:d]
        a, b = check_multinomial_identities(m, d, x)
        assert a.passed and b.passed


def test_power_sum_examples():
    res = pmf_power_sum(1, 1, [0.5], 2)
    assert res["scaled_sum"] == pytest.approx(0.5, abs=1e-15)
    assert res["limit"] == pytest.approx(1 / math.sqrt(math.pi))
    assert abs(pmf_power_sum(500, 1, [0.5], 2)["scaled_sum"] - 0.56419) <= 0.01
    res = pmf_power_sum(200, 2, [1 / 3, 1 / 3], 3)
    assert res["limit"] == pytest.approx(27 / (12 * math.pi ** 2), rel=1e-12)
    assert abs(res["scaled_sum"] / res["limit"] - 1) <= 0.05
    with pytest.raises(SimplexError):
        pmf_power_sum(10, 1, [0.0], 2)


def test_power_sum_vs_scipy_binomial():
    for r, x in [(7, 0.2), (40, 0.65)]:
        p = stats.binom.pmf(np.arange(r + 1), r, x)
        assert pmf_power_sum(r, 1, [x], 2)["scaled_sum"] == pytest.approx(math.sqrt(r) * np.sum(p ** 2), rel=1e-12)
        assert pmf_power_sum(r, 1, [x], 3)["scaled_sum"] == pytest.approx(r * np.sum(p ** 3), rel=1e-12)


def test_power_sum_convergence_2d():
    x = [1 / 3, 1 / 3]
    errs = [abs(pmf_power_sum(r, 2, x)["scaled_sum"] - pmf_power_sum(r, 2, x)["limit"]) for r in (50, 100, 200)]
    assert errs[0] > errs[1] > errs[2]
    assert check_power_sum(200, 2, x, rel_tol=0.05).passed


def test_min_coordinate_examples():
    assert min_coordinate_sum(0, 1, [0.5]) == pytest.approx(-0.25, abs=1e-15)
    assert abs(min_coordinate_sum(0, 500, [0.5]) / min_coordinate_limit(0.5) - 1) <= 0.03
    assert min_coordinate_sum(0, 17, [0.0]) == 0.0
    assert min_coordinate_sum(1, 9, [0.3, 0.0]) == 0.0
    with pytest.raises(IndexError):
        min_coordinate_sum(2, 5, [0.2, 0.3])


@pytest.mark.parametrize("r,x", [(1, 0.5), (3, 0.2), (8, 0.7), (15, 0.45)])
def test_min_coordinate_vs_exact_double_sum(r, x):
    assert min_coordinate_sum(0, r, [x]) == pytest.approx(brute_min_sum(r, x), rel=1e-12, abs=1e-15)


def test_min_coordinate_vs_2d_lattice_sum():
    x = [0.25, 0.4]
    for i in (0, 1):
        assert min_coordinate_sum(i, 12, x) == pytest.approx(brute_min_sum_2d(i, 12, x), rel=1e-11)


def test_min_coordinate_bound_fuzz():
    rng = np.random.default_rng(5)
    xs = rng.uniform(0, 1, 10 ** 4)
    rs = rng.integers(1, 300, 10 ** 4)
    worst = max(abs(min_coordinate_sum(0, int(r), [float(x)])) for x, r in zip(xs, rs))
    assert worst <= 1.0


def test_squared_integral_examples():
    assert squared_pmf_integral(1, 1)["exact"] == pytest.approx(2 / 3, rel=1e-14)
    assert squared_pmf_integral(1, 1)["closed_form"] == pytest.approx(2 / 3, rel=1e-14)
    assert squared_pmf_integral(2, 1)["exact"] == pytest.approx(8 / 15, rel=1e-14)
    assert squared_pmf_integral(5, 2)["psi_integral"] == pytest.approx(0.5, rel=1e-14)


def test_squared_integral_vs_quad():
    r = 6
    f = lambda t: sum(stats.binom.pmf(k, r, t) ** 2 for k in range(r + 1))
    assert squared_pmf_integral(r, 1)["exact"] == pytest.approx(integrate.quad(f, 0, 1)[0], rel=1e-10)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_squared_integral_exact_equals_closed_form(d):
    for r in range(0, 41):
        res = squared_pmf_integral(r, d)
        assert abs(res["exact"] / res["closed_form"] - 1) <= 1e-12


def test_squared_integral_scaled_limit():
    res = [squared_pmf_integral(r, 2) for r in (10, 40, 160)]
    errs = [abs(r ** 1.0 * v["exact"] - v["psi_integral"]) for r, v in zip((10, 40, 160), res)]
    assert errs[0] > errs[1] > errs[2]


def test_gaussian_examples():
    assert gaussian_limit_density([0.5], [0.0]) == pytest.approx(0.79788, abs=1e-5)
    a, b = covariance_determinants([1 / 3, 1 / 3])
    assert a == pytest.approx(1 / 27, rel=1e-12) and b == pytest.approx(1 / 27, rel=1e-12)
    x, y = [0.2, 0.5], [0.3, -0.1]
    assert gaussian_limit_density(x, y) == pytest.approx(gaussian_limit_density(x, [-0.3, 0.1]), rel=1e-14)


def test_gaussian_vs_scipy():
    x = np.array([0.2, 0.3, 0.1])
    cov = np.diag(x) - np.outer(x, x)
    y = np.array([0.1, -0.2, 0.05])
    want = stats.multivariate_normal(np.zeros(3), cov).pdf(y)
    assert gaussian_limit_density(x, y) == pytest.approx(want, rel=1e-10)


def test_gaussian_determinant_mismatch_raises():
    with pytest.raises(FloatingPointError):
        gaussian_limit_density([0.2, 0.3], [0.0, 0.0], det_rtol=-1.0)


def test_tail_bound_examples():
    assert bernstein_tail_bound(1, 1.0, 0.0, 6.0) == pytest.approx(2 * math.exp(-9), rel=1e-14)
    assert bernstein_tail_bound(10, 1.0, 2.0, 1e-8) == pytest.approx(2.0, rel=1e-10)
    ts = np.linspace(0.1, 5, 20)
    vals = [bernstein_tail_bound(10, 1.0, 2.0, t) for t in ts]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_tail_bound_dominates_exact_probability():
    # Rademacher sums: |X_i| <= 1, variance sum n
    n = 30
    k = np.arange(n + 1)
    s = 2 * k - n
    p = stats.binom.pmf(k, n, 0.5)
    for t in (5.0, 10.0, 15.0):
        assert p[np.abs(s) >= t].sum() <= bernstein_tail_bound(n, 1.0, float(n), t)


def test_report_fields():
    rep = LemmaCheckReport("x", {}, 1.01, 1.0, "limit", 0.02, relative=True)
    assert rep.passed and rep.abs_dev == pytest.approx(0.01) and rep.rel_dev == pytest.approx(0.01)
    assert rep.to_dict()["passed"] is True
    assert not LemmaCheckReport("x", {}, 1.5, 1.0, "limit", 0.1).passed
    assert LemmaCheckReport("x", {}, 1.5, 0.0, "closed-form").rel_dev == math.inf


def test_default_sweep_passes_and_is_deterministic():
    a = run_default_sweep(workers=1, seed=3)
    b = run_default_sweep(workers=4, seed=3)
    assert [r.to_dict() for r in a] == [r.to_dict() for r in b]
    summary = summarize(a)
    assert all(summary.values()), summary
    assert {"multinomial-mean", "multinomial-variance", "squared-pmf-integral", "power-sum",
            "min-coordinate-sum", "min-coordinate-bound"} <= set(summary)


@settings(max_examples=40, deadline=None)
@given(r=st.integers(1, 400), x=st.floats(0.0, 1.0))
def test_min_coordinate_bound_property(r, x):
    assert abs(min_coordinate_sum(0, r, [x])) <= 1.0
