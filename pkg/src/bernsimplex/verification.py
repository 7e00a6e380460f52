"""Executable checks of the multinomial identities and technical lemmas.

Every check returns a :class:`LemmaCheckReport` comparing a computed value
with a reference whose provenance is recorded (``closed-form``, ``limit``
or ``brute-force``).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import gammaln
from scipy.stats import binom

from .asymptotics import psi, psi_integral
from .simplex import SimplexError, enumerate_lattice, is_interior, multinomial_log_pmf_table, point_batch


@dataclass
class LemmaCheckReport:
    lemma: str
    params: dict
    computed: float
    reference: float
    provenance: str
    tolerance: float | None = None
    relative: bool = False
    abs_dev: float = field(init=False)
    rel_dev: float = field(init=False)

    def __post_init__(self):
        self.abs_dev = abs(self.computed - self.reference)
        scale = abs(self.reference)
        self.rel_dev = self.abs_dev / scale if scale > 0 else (0.0 if self.abs_dev == 0 else math.inf)

    @property
    def passed(self) -> bool:
        if self.tolerance is None:
            return True
        return bool((self.rel_dev if self.relative else self.abs_dev) <= self.tolerance)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def _interior_point(x, d: int) -> np.ndarray:
    pts, _ = point_batch(x, d)
    if len(pts) != 1:
        raise ValueError("expected a single point")
    if not is_interior(pts)[0]:
        raise SimplexError(f"{pts[0].tolist()} is not an interior point")
    return pts[0]


def _pmf_table(m: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lattice = enumerate_lattice(m, len(x))
    return lattice, np.exp(multinomial_log_pmf_table(m, x, lattice)[0])


# ---------------------------------------------------------------------------
# mean / covariance identities
# ---------------------------------------------------------------------------

def check_multinomial_identities(m: int, d: int, x) -> tuple[LemmaCheckReport, LemmaCheckReport]:
    """Mean and covariance identities of the multinomial weights.

    ``sum_k (k_i/m - x_i) P = 0`` and
    ``sum_k (k_i/m - x_i)(k_j/m - x_j) P = (x_i 1{i=j} - x_i x_j)/m``.
    The reports carry the largest deviation over ``i`` (resp. ``i, j``).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    pts, _ = point_batch(x, d)
    x = pts[0]
    lattice, p = _pmf_table(m, x)
    centred = lattice / m - x
    mean_dev = max(abs(math.fsum(centred[:, i] * p)) for i in range(d))
    cov = np.diag(x) - np.outer(x, x)
    var_dev = 0.0
    for i in range(d):
        for j in range(d):
            s = math.fsum(centred[:, i] * centred[:, j] * p)
            var_dev = max(var_dev, abs(s - cov[i, j] / m))
    params = {"m": m, "d": d, "x": x.tolist()}
    return (LemmaCheckReport("multinomial-mean", params, mean_dev, 0.0, "closed-form", 1e-12),
            LemmaCheckReport("multinomial-variance", params, var_dev, 0.0, "closed-form", 1e-10))


# ---------------------------------------------------------------------------
# power sums and their local-limit values
# ---------------------------------------------------------------------------

def power_sum_limit(x, p: int) -> float:
    """Limit of ``r^{d(p-1)/2} sum_k P_{k,r}^p`` for ``p = 2, 3``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    prod = float(np.prod(x) * (1 - x.sum()))
    d = len(x)
    if p == 2:
        return float(psi(x))
    if p == 3:
        return 1.0 / ((2 * math.sqrt(3) * math.pi) ** d * prod)
    raise ValueError("p must be 2 or 3")


def pmf_power_sum(r: int, d: int, x, p: int = 2) -> dict[str, float]:
    """``r^{d/2} sum P^2`` (``p=2``) or ``r^d sum P^3`` (``p=3``) and its limit."""
    if p not in (2, 3):
        raise ValueError("p must be 2 or 3")
    if r < 1:
        raise ValueError("r must be >= 1")
    x = _interior_point(x, d)
    lattice = enumerate_lattice(r, d)
    logp = multinomial_log_pmf_table(r, x, lattice)[0]
    total = math.fsum(np.exp(p * logp))
    scaled = r ** (d * (p - 1) / 2) * total
    return {"scaled_sum": scaled, "limit": power_sum_limit(x, p)}


def check_power_sum(r: int, d: int, x, p: int = 2, rel_tol: float | None = None) -> LemmaCheckReport:
    res = pmf_power_sum(r, d, x, p)
    return LemmaCheckReport("power-sum", {"r": r, "d": d, "x": np.ravel(x).tolist(), "p": p},
                            res["scaled_sum"], res["limit"], "limit", rel_tol, relative=True)


# ---------------------------------------------------------------------------
# min-coordinate sum
# ---------------------------------------------------------------------------

def min_coordinate_sum(i: int, r: int, x) -> float:
    """``R_{i,r}(x) = r^{1/2} sum_{k,l} (min(k_i,l_i)/r - x_i) P_{k,r}(x) P_{l,r}(x)``.

    ``i`` is 0-based.  The summand depends on the ``i``-th coordinates only,
    so the double lattice sum reduces to two independent
    ``Binomial(r, x_i)`` variables ``A, B``; moreover
    ``E[min(A, B)] = sum_{c=1}^r P(A >= c)^2``, which gives an ``O(r)``
    evaluation.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not 0 <= i < len(x):
        raise IndexError(f"coordinate {i} out of range for d={len(x)}")
    xi = float(x[i])
    c = np.arange(1, r + 1)
    tail = binom.sf(c - 1, r, xi)
    e_min = math.fsum(tail * tail)
    return math.sqrt(r) * (e_min / r - xi)


def min_coordinate_limit(xi: float) -> float:
    return -math.sqrt(xi * (1 - xi) / math.pi)


# ---------------------------------------------------------------------------
# integral of squared weights
# ---------------------------------------------------------------------------

def squared_pmf_integral(r: int, d: int) -> dict[str, float]:
    """``int_S sum_k P_{k,r}^2`` two ways, plus the limiting ``int psi``.

    ``exact`` integrates each ``P_{k,r}^2`` with the Dirichlet moment
    identity in log space and adds the terms with a compensated sum;
    ``closed_form`` is ``2^{-d} sqrt(pi) Gamma(r+1) / (Gamma(d/2+1/2) Gamma(r+d/2+1))``.
    """
    if r < 0 or d < 1:
        raise ValueError("need r >= 0 and d >= 1")
    k = enumerate_lattice(r, d).astype(float)
    last = r - k.sum(axis=1)
    log_coef = gammaln(r + 1.0) - gammaln(k + 1.0).sum(axis=1) - gammaln(last + 1.0)
    # int x^{2k} (1-|x|)^{2 last} dx = prod (2k_i)! (2 last)! / (2r + d)!
    log_moment = gammaln(2 * k + 1.0).sum(axis=1) + gammaln(2 * last + 1.0) - gammaln(2.0 * r + d + 1.0)
    exact = math.fsum(np.exp(2 * log_coef + log_moment))
    closed = math.exp(d * -math.log(2) + 0.5 * math.log(math.pi) + gammaln(r + 1.0)
                      - gammaln(d / 2 + 0.5) - gammaln(r + d / 2 + 1.0))
    return {"exact": exact, "closed_form": closed, "psi_integral": psi_integral(d)}


# ---------------------------------------------------------------------------
# Gaussian limit density and concentration bound
# ---------------------------------------------------------------------------

def limit_covariance(x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return np.diag(x) - np.outer(x, x)


def gaussian_limit_density(x, y, det_rtol: float = 1e-10) -> float:
    """Density at ``y`` of ``N(0, diag(x) - x x^T)``.

    The determinant is computed from a Cholesky factor and compared with
    the product ``x_1 ... x_d (1 - |x|)``; a mismatch beyond ``det_rtol``
    raises ``FloatingPointError``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = len(x)
    x = _interior_point(x, d)
    y = np.atleast_1d(np.asarray(y, dtype=float)).reshape(d)
    chol = np.linalg.cholesky(limit_covariance(x))
    log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
    log_prod = float(np.sum(np.log(x)) + math.log1p(-x.sum()))
    if abs(math.expm1(log_det - log_prod)) > det_rtol:
        raise FloatingPointError(f"determinant mismatch: {math.exp(log_det)} vs {math.exp(log_prod)}")
    z = np.linalg.solve(chol, y)
    return math.exp(-0.5 * float(z @ z) - 0.5 * d * math.log(2 * math.pi) - 0.5 * log_prod)


def covariance_determinants(x) -> tuple[float, float]:
    """``det`` of the limit covariance by factorisation and by the product formula."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float(np.linalg.det(limit_covariance(x))), float(np.prod(x) * (1 - x.sum()))


def bernstein_tail_bound(n: int, b: float, variance_sum: float, t: float) -> float:
    """Bernstein bound ``2 exp(-(t^2/2)/(variance_sum + b t/3))``.

    Bounds ``P(|sum_{i<=n} X_i| >= t)`` for independent centred ``X_i`` with
    ``|X_i| <= b`` and ``sum E X_i^2 <= variance_sum``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if b <= 0 or t <= 0 or variance_sum < 0:
        raise ValueError("need b > 0, t > 0 and variance_sum >= 0")
    return 2.0 * math.exp(-(t * t / 2) / (variance_sum + b * t / 3))


# ---------------------------------------------------------------------------
# sweep used by the command line
# ---------------------------------------------------------------------------

def _sweep_tasks(seed: int):
    rng = np.random.default_rng(seed)
    tasks = []
    for _ in range(30):
        d = int(rng.integers(1, 4))
        m = int(rng.integers(1, 41))
        x = rng.dirichlet(np.ones(d + 1))[:d]
        tasks.append(lambda m=m, d=d, x=x: list(check_multinomial_identities(m, d, x)))
    for d in (1, 2, 3):
        for r in (1, 2, 5, 10, 20, 40):
            def lemma4(r=r, d=d):
                res = squared_pmf_integral(r, d)
                return [LemmaCheckReport("squared-pmf-integral", {"r": r, "d": d}, res["exact"],
                                         res["closed_form"], "closed-form", 1e-12, relative=True)]
            tasks.append(lemma4)
    tasks.append(lambda: [check_power_sum(200, 2, [1 / 3, 1 / 3], 2, 0.05)])
    tasks.append(lambda: [check_power_sum(500, 1, [0.5], 2, 0.02)])
    # drawn here so the stream does not depend on task scheduling
    fuzz_x = rng.uniform(1e-6, 1 - 1e-6, 200)
    fuzz_r = rng.integers(1, 2001, 200)

    def lemma3():
        out = [LemmaCheckReport("min-coordinate-sum", {"i": 0, "r": 500, "x": [0.5]},
                                min_coordinate_sum(0, 500, [0.5]), min_coordinate_limit(0.5),
                                "limit", 0.03, relative=True)]
        worst = 0.0
        for xi, r in zip(fuzz_x, fuzz_r):
            worst = max(worst, abs(min_coordinate_sum(0, int(r), [float(xi)])))
        out.append(LemmaCheckReport("min-coordinate-bound", {"samples": 200}, max(worst - 1.0, 0.0),
                                    0.0, "closed-form", 0.0))
        return out

    tasks.append(lemma3)

    def gauss():
        x = [1 / 3, 1 / 3]
        a, b = covariance_determinants(x)
        return [LemmaCheckReport("gaussian-determinant", {"x": x}, a, b, "closed-form", 1e-10, relative=True),
                LemmaCheckReport("gaussian-density", {"x": [0.5], "y": [0.0]},
                                 gaussian_limit_density([0.5], [0.0]), 1 / math.sqrt(2 * math.pi * 0.25),
                                 "closed-form", 1e-12, relative=True)]

    tasks.append(gauss)
    tasks.append(lambda: [LemmaCheckReport("bernstein-bound", {"b": 1, "v": 0, "t": 6},
                                           bernstein_tail_bound(1, 1.0, 0.0, 6.0), 2 * math.exp(-9),
                                           "closed-form", 1e-12, relative=True)])
    return tasks


def run_default_sweep(workers: int = 1, seed: int = 0) -> list[LemmaCheckReport]:
    """All default checks, in a fixed order regardless of ``workers``."""
    tasks = _sweep_tasks(seed)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            chunks = list(pool.map(lambda f: f(), tasks))
    else:
        chunks = [f() for f in tasks]
    return [rep for chunk in chunks for rep in chunk]


def summarize(reports: list[LemmaCheckReport]) -> dict[str, bool]:
    """Pass/fail per lemma id."""
    out: dict[str, bool] = {}
    for rep in reports:
        out[rep.lemma] = out.get(rep.lemma, True) and rep.passed
    return out
