"""Monte Carlo studies confronting the estimators with their asymptotic theory.

Replicate ``r`` at sample size ``n`` draws its data from
``make_rng(seed, n, r)``; replicates are reduced in index order so a report
depends only on the configuration, never on ``workers``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from .asymptotics import (
    DegenerateBandwidthError,
    asymptotic_error,
    cdf_coeffs,
    density_coeffs,
    functionals,
    optimal_bandwidth,
)
from .bandwidth import gram_matrix
from .estimators import (
    CdfModel,
    DensityModel,
    bernstein_cdf,
    bernstein_poly,
    density_kernel_matrix,
    empirical_cdf,
    eval_density,
    fit_density,
)
from .simplex import (
    MixtureSpec,
    bin_index,
    ceil_index,
    dirichlet_overlap,
    enumerate_lattice,
    integrate_simplex,
    is_interior,
    make_rng,
    multinomial_pmf_table,
    simplex_nodes,
)
from .targets import DistributionModel, mixture_model

STUDIES = ("pointwise", "mise", "normality", "consistency")
M_RULES = ("fixed", "power", "m_opt")
DEFAULT_RESOLUTION = {1: 300, 2: 150}


class PreconditionError(ValueError):
    """A study configuration violates the assumptions of the theorem it checks."""


# ---------------------------------------------------------------------------
# configuration and report
# ---------------------------------------------------------------------------

@dataclass
class StudyConfig:
    """One simulation study.

    ``m_rule`` selects the order per ``n``: ``"fixed"`` uses ``m``;
    ``"power"`` uses ``floor(m_scale * n**m_exponent)`` (``m = n`` is
    ``m_exponent=1``); ``"m_opt"`` uses the rounded asymptotic MISE optimum.
    """

    study: str
    kind: str
    target: MixtureSpec
    n_values: list[int]
    m_rule: str = "fixed"
    m: int | None = None
    m_scale: float = 1.0
    m_exponent: float | None = None
    points: list[list[float]] | None = None
    resolution: int | None = None
    replicates: int = 100
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.target, dict):
            self.target = MixtureSpec.from_dict(self.target)
        self.n_values = [int(n) for n in self.n_values]
        if self.points is not None:
            self.points = [list(map(float, np.atleast_1d(p))) for p in self.points]
        self.validate()

    @property
    def d(self) -> int:
        return self.target.dim

    def validate(self):
        if self.study not in STUDIES:
            raise ValueError(f"study must be one of {STUDIES}, got {self.study!r}")
        if self.kind not in ("cdf", "density"):
            raise ValueError(f"kind must be 'cdf' or 'density', got {self.kind!r}")
        if self.m_rule not in M_RULES:
            raise ValueError(f"m_rule must be one of {M_RULES}, got {self.m_rule!r}")
        if not self.n_values or min(self.n_values) < 10:
            raise ValueError("every n must be >= 10")
        min_reps = 1 if self.study == "consistency" else 2
        if self.replicates < min_reps:
            raise ValueError(f"replicates must be >= {min_reps}")
        if self.m_rule == "fixed" and (self.m is None or self.m < 1):
            raise ValueError("m_rule='fixed' needs m >= 1")
        if self.m_rule == "power" and self.m_exponent is None:
            raise ValueError("m_rule='power' needs m_exponent")
        if self.study in ("pointwise", "normality"):
            if not self.points:
                raise ValueError(f"a {self.study} study needs evaluation points")
            for p in self.points:
                if len(p) != self.d:
                    raise ValueError(f"point {p} does not have dimension {self.d}")
            if self.kind == "density" and not is_interior(np.array(self.points)).all():
                raise PreconditionError("density studies need strictly interior points")

    def m_for(self, n: int, dist: DistributionModel | None = None, coeffs=None) -> int:
        if self.m_rule == "fixed":
            return int(self.m)
        if self.m_rule == "power":
            return max(1, int(math.floor(self.m_scale * n ** self.m_exponent + 1e-9)))
        dist = dist or mixture_model(self.target)
        opt = optimal_bandwidth(self.kind, "integrated", dist, n, coeffs=coeffs,
                                resolution=self.resolution)
        return opt.require().m_rounded

    def to_dict(self) -> dict:
        out = asdict(self)
        out["target"] = self.target.to_dict()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, obj: dict) -> "StudyConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)

    @classmethod
    def from_json(cls, text: str) -> "StudyConfig":
        return cls.from_dict(json.loads(text))


CSV_COLUMNS = ("n", "m", "x", "stat", "value", "se", "theory", "z", "exact", "z_exact")


def _clean(v):
    if isinstance(v, (float, np.floating)):
        return float(v) if math.isfinite(v) else None
    if isinstance(v, dict):
        return {k: _clean(u) for k, u in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(u) for u in v]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


@dataclass
class StudyReport:
    config: dict
    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def row(self, stat: str, n: int | None = None, m: int | None = None, x=None, **values) -> dict:
        """First row matching ``stat`` (and ``n``/``m``/``x`` when given)."""
        for r in self.rows:
            if r["stat"] != stat or (n is not None and r["n"] != n) or (m is not None and r["m"] != m):
                continue
            if x is not None and not np.allclose(r["x"], np.atleast_1d(x)):
                continue
            return r
        raise KeyError(stat)

    def to_dict(self) -> dict:
        return _clean(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            vals = []
            for c in CSV_COLUMNS:
                v = _clean(r.get(c))
                if c == "x" and v is not None:
                    v = ";".join(repr(u) for u in v)
                vals.append("" if v is None else v)
            writer.writerow(vals)
        return buf.getvalue()


def _z(value, se, ref):
    if ref is None or se is None or not math.isfinite(ref):
        return None
    if se == 0:
        return 0.0 if value == ref else math.inf
    return float((value - ref) / se)


def _stat_row(n, m, x, stat, value, se, theory=None, exact=None) -> dict:
    return {
        "n": int(n), "m": None if m is None else int(m),
        "x": None if x is None else [float(v) for v in np.atleast_1d(x)],
        "stat": stat, "value": float(value), "se": None if se is None else float(se),
        "theory": None if theory is None else float(theory), "z": _z(value, se, theory),
        "exact": None if exact is None else float(exact), "z_exact": _z(value, se, exact),
    }


def _mean_se(v: np.ndarray) -> tuple[float, float]:
    return float(np.mean(v)), float(np.std(v, ddof=1) / math.sqrt(len(v)))


def _var_se(v: np.ndarray) -> tuple[float, float]:
    """Unbiased variance and its standard error ``sd((v - mean)^2) / sqrt(R)``."""
    dev2 = (v - v.mean()) ** 2
    return float(np.var(v, ddof=1)), float(np.std(dev2, ddof=1) / math.sqrt(len(v)))


def _run_replicates(fn: Callable[[int], np.ndarray], count: int, workers: int) -> list:
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, range(count)))
    return [fn(r) for r in range(count)]


# ---------------------------------------------------------------------------
# fast evaluation at fixed points
# ---------------------------------------------------------------------------

def cdf_point_tables(m: int, pts: np.ndarray) -> np.ndarray:
    """Tables ``U[q, j] = sum_{k >= j} P_{k,m}(x_q)`` over the ``(m+1)^d`` grid.

    ``F*_{n,m}(x) = mean_i U[ceil_index(X_i)]`` because ``X_i <= k/m`` iff
    ``ceil_index(X_i) <= k``.  Rows are flattened in C order.
    """
    d = pts.shape[1]
    lattice = enumerate_lattice(m, d)
    probs = multinomial_pmf_table(m, pts, lattice)
    out = np.zeros((len(pts),) + (m + 1,) * d)
    out[(slice(None),) + tuple(lattice.T)] = probs
    for axis in range(1, d + 1):
        out = np.flip(np.cumsum(np.flip(out, axis), axis), axis)
    return out.reshape(len(pts), -1)


def density_point_tables(m: int, pts: np.ndarray) -> np.ndarray:
    """Tables ``W[q, k] = w_k(x_q)`` over the ``m^d`` cell grid (zero off the lattice).

    ``f_{n,m}(x) = mean_i W[bin_index(X_i)]``.
    """
    d = pts.shape[1]
    lattice = enumerate_lattice(m - 1, d)
    kern = density_kernel_matrix(m, lattice, pts)
    out = np.zeros((len(pts),) + (m,) * d)
    out[(slice(None),) + tuple(lattice.T)] = kern
    return out.reshape(len(pts), -1)


def _flat(idx: np.ndarray, side: int) -> np.ndarray:
    return np.ravel_multi_index(tuple(idx.T), (side,) * idx.shape[1])


# ---------------------------------------------------------------------------
# exact finite-sample moments
# ---------------------------------------------------------------------------

def cell_masses(dist: DistributionModel, m: int) -> np.ndarray:
    """Probabilities of the cells ``(k/m, (k+1)/m]`` over ``enumerate_lattice(m-1, d)``."""
    if dist.cell_mass is None:
        raise NotImplementedError(f"target {dist.name} has no cell masses")
    lattice = enumerate_lattice(m - 1, dist.d).astype(float)
    return np.asarray(dist.cell_mass(lattice / m, (lattice + 1) / m), dtype=float)


def density_moments(dist: DistributionModel, m: int, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact ``E f_{n,m}(x)`` and ``n Var f_{n,m}(x)`` from the cell masses."""
    c = cell_masses(dist, m)
    kern = density_kernel_matrix(m, enumerate_lattice(m - 1, dist.d), pts)
    mean = kern @ c
    return mean, (kern ** 2) @ c - mean ** 2


def cdf_moments_1d(dist: DistributionModel, m: int, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact ``E F*_{n,m}(x)`` and ``n Var F*_{n,m}(x)`` for ``d = 1``.

    ``n Var = sum_{k,l} F(min(k,l)/m) P_k P_l - (F*_m)^2``.
    """
    k = np.arange(m + 1)
    F = np.asarray(dist.cdf((k / m)[:, None]), dtype=float)
    Fmin = F[np.minimum.outer(k, k)]
    P = multinomial_pmf_table(m, xs.reshape(-1, 1), k[:, None])
    mean = P @ F
    second = np.einsum("qk,kl,ql->q", P, Fmin, P)
    return mean, second - mean ** 2


def _target_overlaps(spec: MixtureSpec, alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    out = np.zeros(len(alpha))
    for c in spec.components:
        out += c.weight * dirichlet_overlap(alpha, beta, c.alpha, c.beta)
    return out


def target_square_integral(spec: MixtureSpec) -> float:
    """``int_S f^2`` for a Dirichlet mixture (infinite if not square integrable)."""
    total = 0.0
    for c in spec.components:
        total += c.weight * float(_target_overlaps(spec, np.array([c.alpha]), np.array([c.beta]))[0])
    return total


def ise_exact(model: DensityModel, spec: MixtureSpec) -> float:
    """``int_S (f_{n,m} - f)^2`` in closed form for a Dirichlet-mixture target.

    Each scaled kernel is the Dirichlet density ``D(k+1, m-|k|)``, so all
    three terms of the square are sums of Dirichlet overlaps.
    """
    p = model.proportions
    bins = model.bins.astype(float)
    cross = _target_overlaps(spec, bins + 1.0, model.m - bins.sum(axis=1))
    quad = float(p @ gram_matrix(model.m, model.bins) @ p)
    return quad - 2.0 * float(p @ cross) + target_square_integral(spec)


def ise_quadrature(model: DensityModel, dist: DistributionModel, resolution: int) -> float:
    return integrate_simplex(lambda x: (eval_density(model, x) - dist.pdf(x)) ** 2, dist.d, resolution)


def mise_exact(dist: DistributionModel, n: int, m: int) -> dict[str, float]:
    """Exact MISE of the density estimator for a Dirichlet-mixture target.

    ``E p_k p_l = c_k c_l (1 - 1/n) + 1{k=l} c_k / n`` with cell masses
    ``c``; returns the integrated variance, integrated squared bias and
    their sum.
    """
    if dist.spec is None:
        raise NotImplementedError("exact MISE needs a Dirichlet-mixture target")
    lattice = enumerate_lattice(m - 1, dist.d)
    c = cell_masses(dist, m)
    G = gram_matrix(m, lattice)
    cGc = float(c @ G @ c)
    diag = float(c @ np.diag(G))
    cross = _target_overlaps(dist.spec, lattice + 1.0, m - lattice.sum(axis=1).astype(float))
    ivar = (diag - cGc) / n
    ibias = cGc - 2.0 * float(c @ cross) + target_square_integral(dist.spec)
    return {"integrated_variance": ivar, "integrated_bias_sq": ibias, "mise": ivar + ibias}


# ---------------------------------------------------------------------------
# studies
# ---------------------------------------------------------------------------

def _point_estimates(cfg: StudyConfig, dist: DistributionModel, n: int, m: int,
                     pts: np.ndarray, workers: int) -> np.ndarray:
    """``(R, q)`` replicate estimates at ``pts``."""
    if cfg.kind == "cdf":
        table = cdf_point_tables(m, pts)

        def one(r):
            X = dist.sampler(n, make_rng(cfg.seed, n, r))
            return table[:, _flat(ceil_index(X, m), m + 1)].mean(axis=1)
    else:
        table = density_point_tables(m, pts)

        def one(r):
            X = dist.sampler(n, make_rng(cfg.seed, n, r))
            return table[:, _flat(bin_index(X, m), m)].mean(axis=1)

    return np.array(_run_replicates(one, cfg.replicates, workers))


def _exact_point_moments(cfg, dist, m, pts):
    try:
        if cfg.kind == "cdf":
            if dist.d == 1:
                return cdf_moments_1d(dist, m, pts[:, 0])
            return bernstein_poly(dist.cdf, m, pts, d=dist.d), None
        return density_moments(dist, m, pts)
    except NotImplementedError:
        return None, None


def run_pointwise_study(cfg: StudyConfig, workers: int = 1) -> StudyReport:
    """Empirical bias and variance at fixed points against their limits.

    c.d.f.: ``m * bias`` against ``B`` and ``n Var`` against
    ``sigma2 - m^{-1/2} V``; density: ``m * bias`` against ``b_norm`` (the
    bias coefficient of the exactly normalised estimator, equal to ``b``
    for ``d = 1``) and ``n m^{-d/2} Var`` against ``psi f``.  Exact finite-sample values are
    reported alongside when the target allows them.
    """
    dist = mixture_model(cfg.target)
    pts = np.array(cfg.points, dtype=float)
    d = dist.d
    rep = StudyReport(cfg.to_dict())
    if cfg.kind == "cdf":
        co = cdf_coeffs(dist, pts)
        truth, bias_c = np.asarray(dist.cdf(pts)), co["B"]
    else:
        co = density_coeffs(dist, pts)
        truth, bias_c = co["f"], co["b_norm"]
    for n in cfg.n_values:
        m = cfg.m_for(n, dist)
        est = _point_estimates(cfg, dist, n, m, pts, workers)
        ex_mean, ex_var = _exact_point_moments(cfg, dist, m, pts)
        for q, x in enumerate(pts):
            e = est[:, q]
            mean, se_mean = _mean_se(e)
            var, se_var = _var_se(e)
            if cfg.kind == "cdf":
                var_scale = n
                var_theory = co["sigma2"][q] - co["V"][q] / math.sqrt(m)
            else:
                var_scale = n * m ** (-d / 2)
                var_theory = co["psi"][q] * co["f"][q]
            exm = None if ex_mean is None else float(ex_mean[q])
            exv = None if ex_var is None else float(ex_var[q])
            rep.rows.append(_stat_row(n, m, x, "mean", mean, se_mean, float(truth[q]), exm))
            rep.rows.append(_stat_row(n, m, x, "scaled_bias", m * (mean - truth[q]), m * se_mean,
                                      float(bias_c[q]), None if exm is None else m * (exm - truth[q])))
            rep.rows.append(_stat_row(n, m, x, "scaled_var", var_scale * var, var_scale * se_var,
                                      float(var_theory), None if exv is None else var_scale * exv / n))
            sq = (e - truth[q]) ** 2
            mse, se_mse = _mean_se(sq)
            theory = asymptotic_error(cfg.kind, "pointwise", dist, n, m, x, bias_form="normalized").predicted
            exact_mse = None if exm is None or exv is None else exv / n + (exm - truth[q]) ** 2
            rep.rows.append(_stat_row(n, m, x, "mse", mse, se_mse, theory, exact_mse))
    flagged = [r for r in rep.rows if r["z"] is not None and abs(r["z"]) > 3 and r["stat"] != "mean"]
    rep.summary = {"max_abs_z": max((abs(r["z"]) for r in rep.rows if r["z"] is not None), default=None),
                   "ci_exclusions": [(r["stat"], r["n"], r["x"]) for r in flagged]}
    for r in flagged:
        rep.warnings.append(f"{r['stat']} at n={r['n']}, x={r['x']}: theory outside 3 SE (z={r['z']:.2f})")
    return rep


def fit_loglog(ns, values) -> tuple[float, float, float]:
    """Least-squares slope of ``log values`` on ``log ns``: (slope, se, intercept)."""
    x, y = np.log(np.asarray(ns, dtype=float)), np.log(np.asarray(values, dtype=float))
    if len(np.unique(x)) < 4:
        raise ValueError("a rate fit needs at least 4 distinct sample sizes")
    res = stats.linregress(x, y)
    return float(res.slope), float(res.stderr), float(res.intercept)


def run_mise_rate_study(cfg: StudyConfig, workers: int = 1) -> StudyReport:
    """MISE at ``m = m_opt(n)`` over a ladder of ``n`` and its log-log slope.

    Raises :class:`DegenerateBandwidthError` when the bias functional
    vanishes (for example a uniform target), since then no optimal order
    exists.
    """
    if len(set(cfg.n_values)) < 4:
        raise ValueError("a rate study needs at least 4 distinct sample sizes")
    dist = mixture_model(cfg.target)
    d = dist.d
    coeffs = functionals(cfg.kind, "integrated", dist, resolution=cfg.resolution)
    first = optimal_bandwidth(cfg.kind, "integrated", dist, cfg.n_values[0], coeffs=coeffs)
    if first.degenerate:
        raise DegenerateBandwidthError(first.reason)
    res = cfg.resolution or DEFAULT_RESOLUTION.get(d, 40)
    rep = StudyReport(cfg.to_dict())
    means, exacts = [], []
    for n in cfg.n_values:
        m = cfg.m_for(n, dist, coeffs) if cfg.m_rule == "m_opt" else cfg.m_for(n, dist)

        if cfg.kind == "density":
            def one(r, n=n, m=m):
                model = fit_density(dist.sampler(n, make_rng(cfg.seed, n, r)), m)
                return ise_exact(model, dist.spec)
        else:
            dist.require_cdf()
            nodes, weights = simplex_nodes(d, res)
            F_nodes = np.asarray(dist.cdf(nodes))

            def one(r, n=n, m=m):
                model = CdfModel(dist.sampler(n, make_rng(cfg.seed, n, r)), m)
                return math.fsum((bernstein_cdf(model, nodes) - F_nodes) ** 2 * weights)

        ise = np.array(_run_replicates(one, cfg.replicates, workers))
        mise, se = _mean_se(ise)
        theory = asymptotic_error(cfg.kind, "integrated", dist, n, m, coeffs=coeffs).predicted
        exact = None
        if cfg.kind == "density" and dist.cell_mass is not None:
            exact = mise_exact(dist, n, m)["mise"]
        means.append(mise)
        exacts.append(exact)
        rep.rows.append(_stat_row(n, m, None, "mise", mise, se, theory, exact))
    slope, slope_se, _ = fit_loglog(cfg.n_values, means)
    target = -4.0 / (d + 4) if cfg.kind == "density" else -1.0
    rep.summary = {"slope": slope, "slope_se": slope_se, "theory_slope": target,
                   "exact_slope": fit_loglog(cfg.n_values, exacts)[0] if None not in exacts else None,
                   "m_values": [r["m"] for r in rep.rows]}
    return rep


def run_normality_study(cfg: StudyConfig, workers: int = 1, min_effective: float = 10.0) -> StudyReport:
    """Standardised replicate estimates against the standard normal.

    c.d.f.: ``sqrt(n) (F*_{n,m} - F*_m) / sigma``; density:
    ``sqrt(n) m^{-d/4} (f_{n,m} - f_m) / sqrt(psi f)``, with the smoothed
    means ``F*_m`` and ``f_m`` computed exactly.  Reports the Kolmogorov
    distance and the variance ratio per point.
    """
    dist = mixture_model(cfg.target)
    pts = np.array(cfg.points, dtype=float)
    d = dist.d
    rep = StudyReport(cfg.to_dict())
    if cfg.kind == "cdf":
        F = np.asarray(dist.cdf(pts))
        bad = (F <= 0) | (F >= 1)
        if bad.any():
            raise PreconditionError(f"F(x) must lie in (0, 1); got {F[bad].tolist()} at {pts[bad].tolist()}")
        scale = np.sqrt(F * (1 - F))
    else:
        co = density_coeffs(dist, pts)
        if (co["f"] <= 0).any():
            raise PreconditionError("f(x) must be positive at every evaluation point")
        scale = np.sqrt(co["psi"] * co["f"])
    for n in cfg.n_values:
        m = cfg.m_for(n, dist)
        if m < 2:
            raise PreconditionError(f"m={m} is too small for a limit-law check")
        if cfg.kind == "density" and n * m ** (-d / 2) < min_effective:
            raise PreconditionError(f"n m^(-d/2) = {n * m ** (-d / 2):.3g} is too small (need >= {min_effective})")
        est = _point_estimates(cfg, dist, n, m, pts, workers)
        if cfg.kind == "cdf":
            centre = np.asarray(bernstein_poly(dist.cdf, m, pts, d=d))
            norm = math.sqrt(n) / scale
        else:
            centre, _ = density_moments(dist, m, pts)
            norm = math.sqrt(n) * m ** (-d / 4) / scale
        exact_ratio = None
        ex = _exact_point_moments(cfg, dist, m, pts)[1]
        for q, x in enumerate(pts):
            z = (est[:, q] - centre[q]) * norm[q]
            ks = stats.kstest(z, "norm")
            var, se_var = _var_se(z)
            if ex is not None:
                exact_ratio = float(ex[q] * norm[q] ** 2 / n)
            rep.rows.append(_stat_row(n, m, x, "ks_distance", ks.statistic, None))
            rep.rows.append(_stat_row(n, m, x, "ks_pvalue", ks.pvalue, None))
            rep.rows.append(_stat_row(n, m, x, "variance_ratio", var, se_var, 1.0, exact_ratio))
            rep.rows.append(_stat_row(n, m, x, "standardised_mean", *_mean_se(z), 0.0))
    rep.summary = {"max_ks": max(r["value"] for r in rep.rows if r["stat"] == "ks_distance")}
    return rep


def consistency_grid(d: int, resolution: int) -> np.ndarray:
    """Interior midpoints of the cells of side ``1/resolution`` inside the simplex."""
    return np.array(simplex_nodes(d, resolution, boundary=False)[0])


def run_consistency_study(cfg: StudyConfig, workers: int = 1) -> StudyReport:
    """Sup-norm errors over an interior grid along a ladder of ``n``.

    c.d.f.: ``sup|F*_{n,m} - F|`` and ``sup|F*_{n,m} - F_n|``; density:
    ``sup|f_{n,m} - f|``.  The summary says whether the replicate means
    decrease strictly along the ladder.
    """
    dist = mixture_model(cfg.target)
    d = dist.d
    grid = consistency_grid(d, cfg.resolution or (200 if d == 1 else 40))
    rep = StudyReport(cfg.to_dict())
    truth = np.asarray(dist.cdf(grid)) if cfg.kind == "cdf" else np.asarray(dist.pdf(grid))
    for n in cfg.n_values:
        m = cfg.m_for(n, dist)

        def one(r, n=n, m=m):
            X = dist.sampler(n, make_rng(cfg.seed, n, r))
            if cfg.kind == "cdf":
                est = bernstein_cdf(CdfModel(X, m), grid)
                return [np.max(np.abs(est - truth)), np.max(np.abs(est - empirical_cdf(X, grid)))]
            est = eval_density(fit_density(X, m), grid)
            return [np.max(np.abs(est - truth))]

        sups = np.array(_run_replicates(one, cfg.replicates, workers), dtype=float)
        names = ["sup_error_truth", "sup_error_empirical"] if cfg.kind == "cdf" else ["sup_error_truth"]
        for j, name in enumerate(names):
            v = sups[:, j]
            se = float(np.std(v, ddof=1) / math.sqrt(len(v))) if len(v) > 1 else None
            rep.rows.append(_stat_row(n, m, None, name, float(np.mean(v)), se))
    trend = {}
    for name in {r["stat"] for r in rep.rows}:
        vals = [r["value"] for r in rep.rows if r["stat"] == name]
        trend[name] = {"values": vals, "strictly_decreasing": bool(np.all(np.diff(vals) < 0)),
                       "final": vals[-1]}
    rep.summary = trend
    return rep


RUNNERS = {
    "pointwise": run_pointwise_study,
    "mise": run_mise_rate_study,
    "normality": run_normality_study,
    "consistency": run_consistency_study,
}


def run_study(cfg: StudyConfig, workers: int = 1) -> StudyReport:
    return RUNNERS[cfg.study](cfg, workers=workers)
