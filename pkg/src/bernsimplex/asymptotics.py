"""Leading-order bias/variance coefficients, MSE/MISE expansions and optimal orders."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .simplex import integrate_dirichlet_weighted, integrate_simplex, is_interior, point_batch
from .targets import DistributionModel


class BoundarySingularityError(ValueError):
    """The density variance constant is infinite on the simplex boundary."""


class DegenerateBandwidthError(ValueError):
    """The bias functional vanishes, so the optimal order is unbounded."""


# quadrature defaults for integrated functionals, per dimension
DEFAULT_RESOLUTION = {1: 300, 2: 150, 3: 40}
DEFAULT_GAUSS_POINTS = 40


def _cov_trace(pts: np.ndarray, hess: np.ndarray) -> np.ndarray:
    """``sum_ij (x_i 1{i=j} - x_i x_j) H_ij`` for each row."""
    diag = np.einsum("qii,qi->q", hess, pts)
    outer = np.einsum("qij,qi,qj->q", hess, pts, pts)
    return diag - outer


def psi(x) -> np.ndarray | float:
    """Density variance constant ``[(4 pi)^d x_1...x_d (1-||x||_1)]^{-1/2}``."""
    arr = np.asarray(x, dtype=float)
    d = arr.shape[1] if arr.ndim == 2 else max(arr.size, 1)
    pts, single = point_batch(arr, d)
    prod = np.prod(pts, axis=1) * (1.0 - pts.sum(axis=1))
    with np.errstate(divide="ignore"):
        out = ((4 * np.pi) ** d * prod) ** -0.5
    return float(out[0]) if single else out


def psi_integral(d: int) -> float:
    """Closed form of ``int_S psi``: ``2^{-d} sqrt(pi) / Gamma((d+1)/2)``."""
    return 2.0 ** -d * math.sqrt(math.pi) / math.gamma(d / 2 + 0.5)


def cdf_coeffs(dist: DistributionModel, x) -> dict[str, np.ndarray | float]:
    """``B``, ``sigma2`` and ``V`` of the c.d.f. estimator at ``x``.

    Returns a dict of floats for a single point, of arrays for a batch.
    """
    dist.require_cdf()
    pts, single = point_batch(x, dist.d)
    F = np.asarray(dist.cdf(pts), dtype=float)
    grad = np.asarray(dist.cdf_grad(pts), dtype=float).reshape(len(pts), dist.d)
    hess = np.asarray(dist.cdf_hess(pts), dtype=float).reshape(len(pts), dist.d, dist.d)
    out = {
        "B": 0.5 * _cov_trace(pts, hess),
        "sigma2": F * (1.0 - F),
        "V": np.sum(grad * np.sqrt(pts * (1.0 - pts) / np.pi), axis=1),
    }
    return {k: float(v[0]) for k, v in out.items()} if single else out


def density_coeffs(dist: DistributionModel, x) -> dict[str, np.ndarray | float]:
    """``b``, ``b_norm``, ``psi`` and ``f`` of the density estimator at interior ``x``.

    ``b`` is the second-order operator applied to ``f``; it is the bias
    coefficient of the estimator scaled by ``m^d``.  With the exact
    normalisation ``(m-1+d)!/(m-1)! = m^d (1 + d(d-1)/(2m) + O(m^-2))`` the
    bias coefficient is ``b_norm = b + d(d-1)/2 f``; the two agree for
    ``d = 1``.
    """
    pts, single = point_batch(x, dist.d)
    inside = is_interior(pts)
    if not inside.all():
        i = int(np.flatnonzero(~inside)[0])
        raise BoundarySingularityError(f"psi is infinite at boundary point {pts[i].tolist()}")
    grad = np.asarray(dist.pdf_grad(pts), dtype=float).reshape(len(pts), dist.d)
    hess = np.asarray(dist.pdf_hess(pts), dtype=float).reshape(len(pts), dist.d, dist.d)
    f = np.asarray(dist.pdf(pts), dtype=float)
    b = np.sum((0.5 - pts) * grad, axis=1) + 0.5 * _cov_trace(pts, hess)
    d = dist.d
    out = {"b": b, "b_norm": b + 0.5 * d * (d - 1) * f, "psi": psi(pts), "f": f}
    return {k: float(v[0]) for k, v in out.items()} if single else out


@dataclass
class AsymptoticReport:
    """Leading terms of an MSE (pointwise) or MISE (integrated) expansion."""

    kind: str
    scope: str
    n: int
    m: float
    variance_term: float
    deficiency_term: float
    bias_sq_term: float
    predicted: float
    rate_exponent: float
    x: list[float] | None = None
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


@dataclass(frozen=True)
class Functionals:
    """Coefficients entering the expansions, at a point or integrated."""

    kind: str
    d: int
    variance: float        # sigma2 (cdf) or psi*f (density)
    deficiency: float      # V (cdf); 0 for density
    bias_sq: float         # B^2 (cdf) or b^2 (density)


BIAS_FORMS = ("leading", "normalized")


def functionals(kind: str, scope: str, dist: DistributionModel, x=None,
                resolution: int | None = None, gauss_points: int = DEFAULT_GAUSS_POINTS,
                bias_form: str = "leading") -> Functionals:
    """Evaluate the coefficients at ``x`` or integrate them over the simplex.

    Integrals use the midpoint rule, except ``int psi f`` which is computed
    with the Dirichlet(1/2, ..., 1/2) Gauss-Jacobi rule that absorbs the
    boundary singularity of ``psi``.  For densities, ``bias_form`` picks
    ``b`` (``"leading"``) or ``b_norm`` (``"normalized"``), see
    :func:`density_coeffs`.
    """
    d = dist.d
    if kind not in ("cdf", "density") or scope not in ("pointwise", "integrated"):
        raise ValueError(f"bad kind/scope {kind!r}/{scope!r}")
    if bias_form not in BIAS_FORMS:
        raise ValueError(f"bias_form must be one of {BIAS_FORMS}, got {bias_form!r}")
    bkey = "b" if bias_form == "leading" else "b_norm"
    if scope == "pointwise":
        if x is None:
            raise ValueError("pointwise scope needs an evaluation point x")
        if kind == "cdf":
            c = cdf_coeffs(dist, np.asarray(x, dtype=float).reshape(d))
            return Functionals(kind, d, c["sigma2"], c["V"], c["B"] ** 2)
        c = density_coeffs(dist, np.asarray(x, dtype=float).reshape(d))
        return Functionals(kind, d, c["psi"] * c["f"], 0.0, c[bkey] ** 2)
    res = resolution or DEFAULT_RESOLUTION.get(d, 30)
    if kind == "cdf":
        dist.require_cdf()

        def each(name):
            return lambda p: cdf_coeffs(dist, p)[name]

        return Functionals(
            kind, d,
            integrate_simplex(each("sigma2"), d, res),
            integrate_simplex(each("V"), d, res),
            integrate_simplex(lambda p: cdf_coeffs(dist, p)["B"] ** 2, d, res),
        )
    half = np.full(d, 0.5)
    psi_f = integrate_dirichlet_weighted(
        lambda p: (4 * np.pi) ** (-d / 2) * np.asarray(dist.pdf(p)), half, 0.5, gauss_points)
    b_sq = integrate_simplex(lambda p: density_coeffs(dist, p)[bkey] ** 2, d, res)
    return Functionals(kind, d, psi_f, 0.0, b_sq)


def _terms(fn: Functionals, n: int, m: float) -> tuple[float, float, float]:
    if fn.kind == "cdf":
        return fn.variance / n, -fn.deficiency / (n * math.sqrt(m)), fn.bias_sq / m ** 2
    return m ** (fn.d / 2) * fn.variance / n, 0.0, fn.bias_sq / m ** 2


def asymptotic_error(kind: str, scope: str, dist: DistributionModel, n: int, m: float, x=None,
                     resolution: int | None = None, coeffs: Functionals | None = None,
                     bias_form: str = "leading") -> AsymptoticReport:
    """Leading-order MSE (``scope="pointwise"``) or MISE (``"integrated"``).

    c.d.f.: ``sigma2/n - V/(n sqrt(m)) + B^2/m^2``; density:
    ``m^{d/2} psi f / n + b^2/m^2`` (integrated versions use the integrals).
    A negative c.d.f. prediction is reported with a warning, not clamped.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    fn = coeffs or functionals(kind, scope, dist, x, resolution, bias_form=bias_form)
    var, defi, bias = _terms(fn, n, m)
    report = AsymptoticReport(
        kind=kind, scope=scope, n=int(n), m=float(m),
        variance_term=var, deficiency_term=defi, bias_sq_term=bias,
        predicted=var + defi + bias,
        rate_exponent=-1.0 if kind == "cdf" else -4.0 / (fn.d + 4),
        x=None if x is None else [float(v) for v in np.ravel(x)],
    )
    if report.predicted < 0:
        msg = "negative predicted error: the deficiency term dominates outside the asymptotic regime"
        report.warnings.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return report


@dataclass
class BandwidthOptimum:
    """Asymptotically optimal order; ``degenerate`` when it is unbounded."""

    kind: str
    scope: str
    n: int
    degenerate: bool
    m_opt: float | None = None
    m_rounded: int | None = None
    error_at_opt: float | None = None
    reason: str = ""

    def require(self) -> "BandwidthOptimum":
        if self.degenerate:
            raise DegenerateBandwidthError(self.reason)
        return self


def optimal_bandwidth(kind: str, scope: str, dist: DistributionModel, n: int, x=None,
                      resolution: int | None = None, coeffs: Functionals | None = None,
                      zero_tol: float = 1e-14, bias_form: str = "leading") -> BandwidthOptimum:
    """Minimise the leading-order expansion over real ``m``.

    c.d.f.: ``m_opt = n^{2/3} (4 B^2 / V)^{2/3}``; density:
    ``m_opt = n^{2/(d+4)} ((4/d) b^2 / (psi f))^{2/(d+4)}``.  A vanishing bias
    (or variance) functional yields ``degenerate=True`` and no number.
    """
    fn = coeffs or functionals(kind, scope, dist, x, resolution, bias_form=bias_form)
    d = fn.d
    if fn.bias_sq <= zero_tol:
        return BandwidthOptimum(kind, scope, n, True,
                                reason="bias functional is zero: the optimal order is unbounded")
    if kind == "cdf":
        if fn.deficiency <= zero_tol:
            return BandwidthOptimum(kind, scope, n, True,
                                    reason="deficiency functional V is zero: no finite optimum")
        m_opt = n ** (2 / 3) * (4 * fn.bias_sq / fn.deficiency) ** (2 / 3)
        err = fn.variance / n - 0.75 * n ** (-4 / 3) * (fn.deficiency ** 4 / (4 * fn.bias_sq)) ** (1 / 3)
    else:
        if fn.variance <= zero_tol:
            return BandwidthOptimum(kind, scope, n, True,
                                    reason="variance functional psi*f is zero: no finite optimum")
        m_opt = n ** (2 / (d + 4)) * ((4 / d) * fn.bias_sq / fn.variance) ** (2 / (d + 4))
        const = (4 / d + 1) / (4 / d) ** (4 / (d + 4))
        err = n ** (-4 / (d + 4)) * const * fn.variance ** (4 / (d + 4)) * fn.bias_sq ** (d / (d + 4))
    return BandwidthOptimum(kind, scope, n, False, m_opt=m_opt,
                            m_rounded=max(1, int(round(m_opt))), error_at_opt=err)


def bandwidth_equivalence(m: float) -> float:
    """Classical kernel bandwidth matching order ``m``: ``h = m^{-1/2}``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return m ** -0.5
