"""Analytic target distributions with the derivatives the asymptotic formulas need."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import betainc
from scipy.stats import beta as beta_dist

from .simplex import MixtureSpec, as_points, dirichlet_log_density, remainder, sample_mixture

Array = np.ndarray


@dataclass(frozen=True)
class DistributionModel:
    """A target law on the d-simplex.

    All callables take a ``(q, d)`` array.  Densities and c.d.f.s return
    ``(q,)``, gradients ``(q, d)`` and Hessians ``(q, d, d)``.  ``sampler``
    is ``sampler(n, seed) -> (n, d) array``.  ``cell_mass``, when present,
    maps boxes ``(lower, upper)`` (two ``(q, d)`` arrays) to their
    probabilities and enables exact smoothed-mean computations.
    """

    d: int
    pdf: Callable[[Array], Array]
    pdf_grad: Callable[[Array], Array]
    pdf_hess: Callable[[Array], Array]
    cdf: Callable[[Array], Array] | None = None
    cdf_grad: Callable[[Array], Array] | None = None
    cdf_hess: Callable[[Array], Array] | None = None
    sampler: Callable[[int, int], Array] | None = None
    cell_mass: Callable[[Array, Array], Array] | None = None
    spec: MixtureSpec | None = None
    name: str = ""

    def require_cdf(self):
        if self.cdf is None or self.cdf_grad is None or self.cdf_hess is None:
            raise NotImplementedError(f"target {self.name or '?'} has no c.d.f. derivatives (d={self.d})")


# ---------------------------------------------------------------------------
# Dirichlet components
# ---------------------------------------------------------------------------

def _log_grad_terms(alpha: Array, beta: float, pts: Array):
    """Gradient of log D and the diagonal/constant parts of its Hessian."""
    with np.errstate(divide="ignore", invalid="ignore"):
        a1 = alpha - 1.0
        r = remainder(pts)[:, None]
        g = np.where(a1 == 0, 0.0, a1 / pts) - (0.0 if beta == 1 else (beta - 1.0) / r)
        diag = np.where(a1 == 0, 0.0, -a1 / pts ** 2)
        const = np.zeros_like(r) if beta == 1 else -(beta - 1.0) / r ** 2
    return g, diag, const[:, 0]


def _component_pdf(alpha, beta, pts):
    return np.exp(dirichlet_log_density(alpha, beta, pts))


def _mixture_pdf(spec: MixtureSpec, x) -> Array:
    return spec.pdf(as_points(x, spec.dim))


def _mixture_grad(spec: MixtureSpec, x) -> Array:
    pts = as_points(x, spec.dim)
    out = np.zeros_like(pts)
    for c in spec.components:
        alpha = np.asarray(c.alpha)
        f = _component_pdf(alpha, c.beta, pts)
        g, _, _ = _log_grad_terms(alpha, c.beta, pts)
        out += c.weight * f[:, None] * g
    return out


def _mixture_hess(spec: MixtureSpec, x) -> Array:
    pts = as_points(x, spec.dim)
    q, d = pts.shape
    out = np.zeros((q, d, d))
    eye = np.eye(d)
    for c in spec.components:
        alpha = np.asarray(c.alpha)
        f = _component_pdf(alpha, c.beta, pts)
        g, diag, const = _log_grad_terms(alpha, c.beta, pts)
        h = g[:, :, None] * g[:, None, :] + diag[:, :, None] * eye + const[:, None, None]
        out += c.weight * f[:, None, None] * h
    return out


# c.d.f. pieces -------------------------------------------------------------

def _beta_cdf_1d(spec: MixtureSpec, x) -> Array:
    t = np.clip(as_points(x, 1)[:, 0], 0.0, 1.0)
    return sum(c.weight * betainc(c.alpha[0], c.beta, t) for c in spec.components)


def _dir2_cdf_point(a1: float, a2: float, b: float, x1: float, x2: float) -> float:
    """``P(X1 <= x1, X2 <= x2)`` for a 2-d Dirichlet, by one quadrature.

    Uses the stick-breaking factorisation ``X1 ~ Beta(a1, a2 + b)`` and
    ``X2 / (1 - X1) | X1 ~ Beta(a2, b)``.
    """
    x1, x2 = min(max(x1, 0.0), 1.0), min(max(x2, 0.0), 1.0)
    if x1 == 0.0 or x2 == 0.0:
        return 0.0
    marginal = beta_dist(a1, a2 + b)

    def integrand(t):
        u = min(1.0, x2 / (1.0 - t)) if t < 1.0 else 1.0
        return marginal.pdf(t) * betainc(a2, b, u)

    kink = 1.0 - x2
    pts = [kink] if 0.0 < kink < x1 else None
    val, _ = integrate.quad(integrand, 0.0, x1, points=pts, epsabs=1e-13, epsrel=1e-11, limit=200)
    return val


def _dir2_partial(a_own: float, a_other: float, b: float, own: Array, other: Array):
    """``dF/dx_own`` and ``d2F/dx_own^2`` for a 2-d Dirichlet component."""
    g = beta_dist.pdf(own, a_own, a_other + b)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(own < 1, other / (1.0 - own), np.inf)
        inside = u < 1
        uc = np.clip(u, 0.0, 1.0)
        cond = betainc(a_other, b, uc)
        dlog_g = ((0.0 if a_own == 1 else (a_own - 1.0) / own)
                  - (0.0 if a_other + b == 1 else (a_other + b - 1.0) / (1.0 - own)))
        first = g * cond
        second = g * dlog_g * cond + np.where(
            inside, g * beta_dist.pdf(uc, a_other, b) * other / (1.0 - own) ** 2, 0.0)
    return first, second


def _dir2_cdf_grad_hess(spec: MixtureSpec, x):
    pts = as_points(x, 2)
    q = len(pts)
    grad = np.zeros((q, 2))
    hess = np.zeros((q, 2, 2))
    for c in spec.components:
        a1, a2 = c.alpha
        d1, dd1 = _dir2_partial(a1, a2, c.beta, pts[:, 0], pts[:, 1])
        d2, dd2 = _dir2_partial(a2, a1, c.beta, pts[:, 1], pts[:, 0])
        cross = _component_pdf(np.array(c.alpha), c.beta, pts)
        grad += c.weight * np.column_stack([d1, d2])
        hess[:, 0, 0] += c.weight * dd1
        hess[:, 1, 1] += c.weight * dd2
        hess[:, 0, 1] += c.weight * cross
        hess[:, 1, 0] += c.weight * cross
    return grad, hess


def _dir2_cdf(spec: MixtureSpec, x) -> Array:
    pts = as_points(x, 2)
    out = np.zeros(len(pts))
    for c in spec.components:
        a1, a2 = c.alpha
        out += c.weight * np.array([_dir2_cdf_point(a1, a2, c.beta, p[0], p[1]) for p in pts])
    return out


def _box_mass_1d(spec: MixtureSpec, lower: Array, upper: Array) -> Array:
    return _beta_cdf_1d(spec, upper[:, 0]) - _beta_cdf_1d(spec, lower[:, 0])


def _box_mass_2d(spec: MixtureSpec, lower: Array, upper: Array) -> Array:
    """Probability of boxes ``(lo1, hi1] x (lo2, hi2]`` for a 2-d mixture."""
    out = np.zeros(len(lower))
    for c in spec.components:
        a1, a2 = c.alpha
        marginal = beta_dist(a1, a2 + c.beta)
        for row, (lo, hi) in enumerate(zip(lower, upper)):
            t_hi = min(hi[0], 1.0 - lo[1])
            if t_hi <= lo[0]:
                continue

            def integrand(t, lo2=lo[1], hi2=hi[1]):
                s = 1.0 - t
                return marginal.pdf(t) * (betainc(a2, c.beta, min(1.0, hi2 / s))
                                          - betainc(a2, c.beta, min(1.0, lo2 / s)))

            kinks = [v for v in (1.0 - hi[1],) if lo[0] < v < t_hi]
            val, _ = integrate.quad(integrand, lo[0], t_hi, points=kinks or None,
                                    epsabs=1e-14, epsrel=1e-11, limit=200)
            out[row] += c.weight * val
    return out


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def mixture_model(spec: MixtureSpec, name: str = "") -> DistributionModel:
    """Analytic :class:`DistributionModel` for a finite Dirichlet mixture.

    Density derivatives are available in every dimension.  The c.d.f. and
    its derivatives are provided for ``d = 1`` (closed form) and ``d = 2``
    (the c.d.f. itself by one-dimensional quadrature, its derivatives in
    closed form).
    """
    d = spec.dim
    kw: dict = {}
    if d == 1:
        kw = dict(
            cdf=lambda x: _beta_cdf_1d(spec, x),
            cdf_grad=lambda x: _mixture_pdf(spec, x)[:, None],
            cdf_hess=lambda x: _mixture_grad(spec, x)[:, :, None],
            cell_mass=lambda lo, hi: _box_mass_1d(spec, lo, hi),
        )
    elif d == 2:
        kw = dict(
            cdf=lambda x: _dir2_cdf(spec, x),
            cdf_grad=lambda x: _dir2_cdf_grad_hess(spec, x)[0],
            cdf_hess=lambda x: _dir2_cdf_grad_hess(spec, x)[1],
            cell_mass=lambda lo, hi: _box_mass_2d(spec, lo, hi),
        )
    return DistributionModel(
        d=d,
        pdf=lambda x: _mixture_pdf(spec, x),
        pdf_grad=lambda x: _mixture_grad(spec, x),
        pdf_hess=lambda x: _mixture_hess(spec, x),
        sampler=lambda n, seed: sample_mixture(spec, n, seed),
        spec=spec,
        name=name or "dirichlet-mixture",
        **kw,
    )


def uniform_model(d: int) -> DistributionModel:
    return mixture_model(MixtureSpec.uniform(d), name=f"uniform-{d}")


def _fd_grad(fn, pts: Array, step: float) -> Array:
    q, d = pts.shape
    out = np.empty((q, d))
    for i in range(d):
        h = step * np.maximum(1.0, np.abs(pts[:, i]))
        e = np.zeros(d)
        e[i] = 1.0
        out[:, i] = (fn(pts + h[:, None] * e) - fn(pts - h[:, None] * e)) / (2 * h)
    return out


def _fd_hess(fn, pts: Array, step: float) -> Array:
    q, d = pts.shape
    out = np.empty((q, d, d))
    f0 = fn(pts)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = step
        out[:, i, i] = (fn(pts + ei) - 2 * f0 + fn(pts - ei)) / step ** 2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = step
            v = (fn(pts + ei + ej) - fn(pts + ei - ej) - fn(pts - ei + ej) + fn(pts - ei - ej)) / (4 * step ** 2)
            out[:, i, j] = out[:, j, i] = v
    return out


def finite_difference_model(d: int, pdf, cdf=None, sampler=None, step: float = 1e-5,
                            hess_step: float = 1e-4, name: str = "") -> DistributionModel:
    """Build a :class:`DistributionModel` whose derivatives are central differences.

    ``pdf`` and ``cdf`` take ``(q, d)`` arrays.  Probes must stay a few steps
    away from the boundary.
    """
    kw = {}
    if cdf is not None:
        kw = dict(cdf=cdf,
                  cdf_grad=lambda x: _fd_grad(cdf, as_points(x, d), step),
                  cdf_hess=lambda x: _fd_hess(cdf, as_points(x, d), hess_step))
    return DistributionModel(
        d=d, pdf=pdf,
        pdf_grad=lambda x: _fd_grad(pdf, as_points(x, d), step),
        pdf_hess=lambda x: _fd_hess(pdf, as_points(x, d), hess_step),
        sampler=sampler, name=name or "finite-difference", **kw,
    )


# named targets used in docs, demos and the acceptance suite
ILLUSTRATIVE_MIXTURE = MixtureSpec.from_dict({"components": [
    {"weight": 0.4, "alpha": [3.0, 1.4], "beta": 0.7},
    {"weight": 0.6, "alpha": [5.0, 3.2], "beta": 0.9},
]})
