"""Geometry, combinatorics and probability kernels on the unit simplex.

Points are numpy arrays of shape ``(d,)`` (a single point) or ``(q, d)``
(a batch).  Lattice indices are integer rows of shape ``(d,)``; the implied
last coordinate ``m - sum(k)`` is never stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln, roots_jacobi, xlogy

GEOM_EPS = 1e-12


class SimplexError(ValueError):
    """A point or parameter violates the simplex constraints."""


class QuadratureError(FloatingPointError):
    """An integrand returned a non-finite value at a quadrature node."""


# ---------------------------------------------------------------------------
# points
# ---------------------------------------------------------------------------

def as_points(x, d: int | None = None) -> np.ndarray:
    """Return ``x`` as a float array of shape ``(q, d)``."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1) if d is None or arr.shape[0] == d else arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise SimplexError(f"expected points of shape (q, d), got {arr.shape}")
    if d is not None and arr.shape[1] != d:
        raise SimplexError(f"dimension mismatch: expected d={d}, got {arr.shape[1]}")
    return arr


def point_batch(x, d: int) -> tuple[np.ndarray, bool]:
    """Normalise ``x`` to ``(q, d)`` and report whether it was a single point.

    A scalar, or a 1-d array of length ``d``, is a single point; for
    ``d = 1`` a longer 1-d array is a batch of scalars.
    """
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 0 or (arr.ndim == 1 and arr.shape[0] == d)
    return as_points(arr, d), single


def validate_points(x, d: int | None = None, eps: float = GEOM_EPS) -> np.ndarray:
    """Check that every row of ``x`` lies on the closed simplex.

    Raises
    ------
    SimplexError
        Naming the first offending row.
    """
    pts = as_points(x, d)
    bad = ~np.isfinite(pts).all(axis=1)
    bad |= (pts < 0).any(axis=1) | (pts > 1).any(axis=1)
    bad |= pts.sum(axis=1) > 1 + eps
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise SimplexError(f"point {i} = {pts[i].tolist()} is not on the unit simplex")
    return pts


def is_interior(x) -> np.ndarray:
    """Boolean mask of strictly interior points (positive coords, sum < 1)."""
    pts = as_points(x)
    return (pts > 0).all(axis=1) & (pts.sum(axis=1) < 1)


def remainder(pts: np.ndarray) -> np.ndarray:
    """``1 - ||x||_1`` clamped at zero (absorbs the ``GEOM_EPS`` overshoot)."""
    return np.maximum(1.0 - pts.sum(axis=-1), 0.0)


# ---------------------------------------------------------------------------
# lattice
# ---------------------------------------------------------------------------

@lru_cache(maxsize=256)
def _lattice(m: int, d: int) -> np.ndarray:
    if d == 1:
        out = np.arange(m + 1, dtype=np.int64).reshape(-1, 1)
    else:
        blocks = []
        for first in range(m + 1):
            rest = _lattice(m - first, d - 1)
            blocks.append(np.column_stack([np.full(len(rest), first, dtype=np.int64), rest]))
        out = np.concatenate(blocks)
    out.setflags(write=False)
    return out


def enumerate_lattice(m: int, d: int) -> np.ndarray:
    """All ``k`` in ``N_0^d`` with ``sum(k) <= m``, in lexicographic order.

    The result has ``C(m + d, d)`` rows and is read-only (it is cached).

    >>> enumerate_lattice(2, 2).tolist()
    [[0, 0], [0, 1], [0, 2], [1, 0], [1, 1], [2, 0]]
    """
    if m < 0 or d < 1:
        raise ValueError(f"need m >= 0 and d >= 1, got m={m}, d={d}")
    return _lattice(int(m), int(d))


def lattice_size(m: int, d: int) -> int:
    return math.comb(m + d, d)


# ---------------------------------------------------------------------------
# multinomial weights
# ---------------------------------------------------------------------------

def multinomial_log_pmf(k, m: int, x) -> float:
    """``log P_{k,m}(x)`` for one index and one point, via log-gamma.

    Returns ``-inf`` when a zero base carries a positive exponent.
    """
    k = np.asarray(k, dtype=np.int64).ravel()
    if (k < 0).any() or k.sum() > m:
        raise ValueError(f"index {k.tolist()} is not in the lattice of order {m}")
    return float(multinomial_log_pmf_table(m, as_points(x, len(k)), k.reshape(1, -1))[0, 0])


def multinomial_log_pmf_table(m: int, x, lattice: np.ndarray | None = None) -> np.ndarray:
    """Log multinomial weights for every point (rows) and index (columns).

    Parameters
    ----------
    m : int
        Number of trials.
    x : array_like, shape (q, d)
        Evaluation points on the simplex.
    lattice : ndarray, shape (N, d), optional
        Indices to evaluate; defaults to the full lattice of order ``m``.

    Returns
    -------
    ndarray, shape (q, N)
    """
    pts = as_points(x)
    d = pts.shape[1]
    if lattice is None:
        lattice = enumerate_lattice(m, d)
    k = np.asarray(lattice, dtype=np.int64)
    rest = m - k.sum(axis=1)
    logc = gammaln(m + 1.0) - gammaln(k + 1.0).sum(axis=1) - gammaln(rest + 1.0)
    out = np.broadcast_to(logc, (pts.shape[0], k.shape[0])).copy()
    for i in range(d):
        out += xlogy(k[:, i][None, :], pts[:, i][:, None])
    out += xlogy(rest[None, :], remainder(pts)[:, None])
    return out


def multinomial_pmf_table(m: int, x, lattice: np.ndarray | None = None) -> np.ndarray:
    return np.exp(multinomial_log_pmf_table(m, x, lattice))


# ---------------------------------------------------------------------------
# Dirichlet
# ---------------------------------------------------------------------------

def dirichlet_log_density(alpha, beta: float, x) -> np.ndarray | float:
    """Log density of ``Dirichlet(alpha, beta)`` on the d-simplex.

    ``beta`` is the parameter of the implied last coordinate ``1 - ||x||_1``.
    At boundary points a zero base gives ``-inf`` for a positive exponent
    and ``+inf`` for a negative one; points off the simplex give ``-inf``.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    if (alpha <= 0).any() or beta <= 0:
        raise SimplexError(f"Dirichlet parameters must be positive, got {alpha.tolist()}, {beta}")
    pts, scalar = point_batch(x, len(alpha))
    out = gammaln(beta + alpha.sum()) - gammaln(beta) - gammaln(alpha).sum()
    out = out + xlogy(alpha - 1.0, pts).sum(axis=1) + xlogy(beta - 1.0, remainder(pts))
    off = (pts < 0).any(axis=1) | (pts.sum(axis=1) > 1 + GEOM_EPS)
    out = np.where(off, -np.inf, out)
    return float(out[0]) if scalar else out


def dirichlet_moment_integral(a: Sequence[int], b: int, exact_limit: int = 2000):
    """``int_S (1 - ||x||_1)^b prod x_i^{a_i} dx = b! prod a_i! / (b + sum a + d)!``.

    Returned as a :class:`fractions.Fraction` while ``b + sum(a) + d`` is at
    most ``exact_limit``; as a float computed with log-gamma beyond that.
    """
    a = [int(v) for v in np.atleast_1d(a)]
    if min(a) < 0 or b < 0:
        raise ValueError("exponents must be nonnegative integers")
    top = b + sum(a) + len(a)
    if top <= exact_limit:
        num = math.factorial(b)
        for v in a:
            num *= math.factorial(v)
        return Fraction(num, math.factorial(top))
    return math.exp(gammaln(b + 1) + sum(gammaln(v + 1) for v in a) - gammaln(top + 1))


def _log_mbeta(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    return gammaln(alpha).sum(axis=-1) + gammaln(beta) - gammaln(alpha.sum(axis=-1) + beta)


def dirichlet_overlap(alpha1, beta1, alpha2, beta2) -> np.ndarray:
    """``int_S D(alpha1, beta1) D(alpha2, beta2) dx`` in closed form.

    The product of two Dirichlet kernels is again one, so the integral is
    ``B(alpha1 + alpha2 - 1, beta1 + beta2 - 1) / (B(alpha1, beta1) B(alpha2, beta2))``
    with ``B`` the multivariate beta function.  Rows of ``alpha1`` (shape
    ``(K, d)``) with ``beta1`` (shape ``(K,)``) are paired with one
    ``(alpha2, beta2)``.  Infinite when the product is not integrable.
    """
    a1 = np.atleast_2d(np.asarray(alpha1, dtype=float))
    b1 = np.broadcast_to(np.asarray(beta1, dtype=float), a1.shape[:1])
    a2 = np.asarray(alpha2, dtype=float).reshape(1, -1)
    b2 = float(beta2)
    sa, sb = a1 + a2 - 1.0, b1 + b2 - 1.0
    out = np.full(len(a1), np.inf)
    ok = (sa > 0).all(axis=1) & (sb > 0)
    log_val = (_log_mbeta(sa[ok], sb[ok]) - _log_mbeta(a1[ok], b1[ok])
               - _log_mbeta(a2, np.array([b2]))[0])
    out[ok] = np.exp(log_val)
    return out


# ---------------------------------------------------------------------------
# mixtures and sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Component:
    weight: float
    alpha: tuple[float, ...]
    beta: float


@dataclass(frozen=True)
class MixtureSpec:
    """Finite mixture of Dirichlet densities on the d-simplex."""

    components: tuple[Component, ...]

    def __post_init__(self):
        if not self.components:
            raise SimplexError("a mixture needs at least one component")
        d = len(self.components[0].alpha)
        total = 0.0
        for c in self.components:
            if len(c.alpha) != d:
                raise SimplexError("all components must share the same dimension")
            if not 0 < c.weight <= 1:
                raise SimplexError(f"component weight {c.weight} outside (0, 1]")
            if min(c.alpha) <= 0 or c.beta <= 0:
                raise SimplexError("Dirichlet parameters must be positive")
            total += c.weight
        if abs(total - 1.0) > 1e-12:
            raise SimplexError(f"component weights sum to {total}, not 1")

    @property
    def dim(self) -> int:
        return len(self.components[0].alpha)

    @classmethod
    def single(cls, alpha, beta) -> "MixtureSpec":
        return cls((Component(1.0, tuple(float(a) for a in np.atleast_1d(alpha)), float(beta)),))

    @classmethod
    def uniform(cls, d: int) -> "MixtureSpec":
        return cls.single([1.0] * d, 1.0)

    @classmethod
    def from_dict(cls, obj: dict) -> "MixtureSpec":
        return cls(tuple(
            Component(float(c["weight"]), tuple(float(a) for a in c["alpha"]), float(c["beta"]))
            for c in obj["components"]
        ))

    def to_dict(self) -> dict:
        return {"components": [
            {"weight": c.weight, "alpha": list(c.alpha), "beta": c.beta} for c in self.components
        ]}

    def pdf(self, x) -> np.ndarray:
        pts = as_points(x, self.dim)
        out = np.zeros(len(pts))
        for c in self.components:
            out += c.weight * np.exp(dirichlet_log_density(c.alpha, c.beta, pts))
        return out


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based (Philox) generator for the stream ``(seed, *stream)``.

    Replicate ``r`` of a study seeded with ``s`` uses ``make_rng(s, r)``, so
    streams are disjoint and independent of how replicates are scheduled.
    """
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(v) for v in stream]])
    return np.random.Generator(np.random.Philox(ss))


def sample_mixture(spec: MixtureSpec, n: int, seed) -> np.ndarray:
    """Draw ``n`` points from ``spec``; returns an array of shape ``(n, d)``.

    ``seed`` is an integer or an existing :class:`numpy.random.Generator`.
    Each Dirichlet draw normalises independent Gamma variates and keeps the
    first ``d`` coordinates.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    d = spec.dim
    weights = np.array([c.weight for c in spec.components])
    if len(weights) == 1:
        labels = np.zeros(n, dtype=np.int64)
    else:
        labels = rng.choice(len(weights), size=n, p=weights / weights.sum())
    out = np.empty((n, d))
    for j, c in enumerate(spec.components):
        idx = np.flatnonzero(labels == j)
        if not len(idx):
            continue
        shape = np.append(np.asarray(c.alpha), c.beta)
        g = rng.standard_gamma(shape, size=(len(idx), d + 1))
        out[idx] = g[:, :d] / g.sum(axis=1, keepdims=True)
    return out


# ---------------------------------------------------------------------------
# binning
# ---------------------------------------------------------------------------

def ceil_index(x, m: int) -> np.ndarray:
    """Smallest integer ``j`` with ``x <= j / m``, elementwise.

    ``ceil(m * x)`` can be off by one when ``m * x`` rounds; the result is
    corrected against the same floating-point ``j / m`` comparison used by
    the empirical CDF.
    """
    x = np.asarray(x, dtype=float)
    j = np.ceil(m * x).astype(np.int64)
    j = np.where((j - 1) / m >= x, j - 1, j)
    j = np.where(j / m < x, j + 1, j)
    return j


def bin_index(x, m: int) -> np.ndarray:
    """Histogram cell ``k`` with ``x`` in ``(k/m, (k+1)/m]``.

    Works on a single point (returns shape ``(d,)``) or a batch.  Zero
    coordinates go to cell 0.  The result always satisfies
    ``sum(k) <= m - 1``; the rare float overshoot allowed by ``GEOM_EPS``
    is pulled back by decrementing the largest entry.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    arr = np.asarray(x, dtype=float)
    single = arr.ndim <= 1
    pts = validate_points(arr.reshape(1, -1) if single else arr)
    k = np.maximum(ceil_index(pts, m) - 1, 0)
    over = k.sum(axis=1) - (m - 1)
    for row in np.flatnonzero(over > 0):
        while k[row].sum() > m - 1:
            k[row, np.argmax(k[row])] -= 1
    return k[0] if single else k


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def _irwin_hall_cdf(t: float, d: int) -> float:
    """``P(U_1 + ... + U_d <= t)`` for independent uniforms."""
    if d == 0:
        return 1.0 if t >= 0 else 0.0
    if t <= 0:
        return 0.0
    if t >= d:
        return 1.0
    return sum((-1) ** k * math.comb(d, k) * (t - k) ** d for k in range(int(math.floor(t)) + 1)) / math.factorial(d)


@lru_cache(maxsize=None)
def _cut_cube(d: int, t: int) -> tuple[float, float]:
    """Volume and centroid offset of ``[0,1]^d`` cut by ``sum(u) <= t``.

    By symmetry the centroid is ``c * (1, ..., 1)`` with
    ``c = E[U_1 1{sum U <= t}] / P(sum U <= t)``.
    """
    vol = _irwin_hall_cdf(t, d)
    # E[U_1 1{...}] = int_0^1 u P(U_2 + ... + U_d <= t - u) du
    # exact on each piece between the kinks u = t - k
    nodes, weights = np.polynomial.legendre.leggauss(d + 2)
    moment = 0.0
    kinks = sorted({0.0, 1.0} | {float(t - k) for k in range(d) if 0 < t - k < 1})
    for a, b in zip(kinks[:-1], kinks[1:]):
        u = (a + b) / 2 + (b - a) / 2 * nodes
        moment += (b - a) / 2 * sum(wi * ui * _irwin_hall_cdf(t - ui, d - 1) for ui, wi in zip(u, weights))
    return vol, moment / vol


@lru_cache(maxsize=32)
def _midpoint_rule(d: int, resolution: int, boundary: bool) -> tuple[np.ndarray, np.ndarray]:
    h = 1.0 / resolution
    cubes = enumerate_lattice(resolution - 1, d)
    level = cubes.sum(axis=1)
    inside = level + d <= resolution
    nodes = [(cubes[inside] + 0.5) * h]
    weights = [np.full(int(inside.sum()), h ** d)]
    if boundary and d > 1:
        # cubes cut by the face sum(x) = 1 keep the part with local sum <= t
        for t in range(1, d):
            sel = cubes[level == resolution - t]
            if not len(sel):
                continue
            vol, c = _cut_cube(d, t)
            nodes.append((sel + c) * h)
            weights.append(np.full(len(sel), vol * h ** d))
    x, w = np.concatenate(nodes), np.concatenate(weights)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=64)
def _dirichlet_gauss_rule(alpha: tuple[float, ...], beta: float, npts: int):
    # stick-breaking: x_1 = u_1, x_i = u_i * prod_{j<i} (1 - u_j); axis i has
    # weight u^{alpha_i - 1} (1 - u)^{alpha_{i+1} + ... + alpha_d + beta - 1}
    d = len(alpha)
    axes = []
    for i in range(d):
        a = sum(alpha[i + 1:]) + beta - 1.0
        b = alpha[i] - 1.0
        t, w = roots_jacobi(npts, a, b)
        axes.append(((1.0 + t) / 2.0, w / 2.0 ** (a + b + 1.0)))
    grids = np.meshgrid(*[u for u, _ in axes], indexing="ij")
    wgrids = np.meshgrid(*[w for _, w in axes], indexing="ij")
    u = np.stack([g.ravel() for g in grids], axis=1)
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    x = np.empty_like(u)
    stick = np.ones(len(u))
    for i in range(d):
        x[:, i] = stick * u[:, i]
        stick = stick * (1.0 - u[:, i])
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def simplex_nodes(d: int, resolution: int, rule: str = "midpoint", boundary: bool = True):
    """Quadrature nodes and weights on the d-simplex; all nodes are interior.

    ``rule="midpoint"`` uses the midpoints of the cells of side
    ``1/resolution`` lying inside the simplex.  With ``boundary=True`` each
    cell cut by the face ``||x||_1 = 1`` adds one node at the centroid of
    its inside part, weighted by that part's exact volume, so the weights
    sum to the simplex volume and the rule is second order.
    ``boundary=False`` keeps the whole cells only.

    ``rule="gauss"`` is a collapsed-coordinate Gauss-Jacobi product rule
    with ``resolution`` points per axis, exact for polynomials of degree
    up to ``2 * resolution - 1``.
    """
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    if rule == "midpoint":
        return _midpoint_rule(int(d), int(resolution), bool(boundary))
    if rule == "gauss":
        return _dirichlet_gauss_rule((1.0,) * d, 1.0, int(resolution))
    raise ValueError(f"unknown quadrature rule {rule!r}")


def _checked_sum(values: np.ndarray, weights: np.ndarray, nodes: np.ndarray) -> float:
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.shape[0] != nodes.shape[0]:
        raise ValueError("integrand must return one value per node")
    bad = ~np.isfinite(values)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise QuadratureError(f"integrand is {values[i]} at node {nodes[i].tolist()}")
    return math.fsum(values * weights)


def integrate_simplex(fn: Callable[[np.ndarray], np.ndarray], d: int, resolution: int,
                      rule: str = "midpoint", boundary: bool = True) -> float:
    """Integrate ``fn`` over the unit d-simplex.

    ``fn`` receives a ``(N, d)`` array of nodes and returns ``N`` values.
    See :func:`simplex_nodes` for the rules.
    """
    x, w = simplex_nodes(d, resolution, rule, boundary)
    return _checked_sum(fn(x), w, x)


def integrate_dirichlet_weighted(fn: Callable[[np.ndarray], np.ndarray], alpha, beta: float,
                                 npts: int) -> float:
    """``int_S fn(x) prod x_i^{alpha_i-1} (1-||x||_1)^{beta-1} dx`` by Gauss-Jacobi.

    The algebraic boundary factors are absorbed in the weights, so integrands
    like ``psi * f`` (which blow up on the boundary) are handled accurately.
    """
    x, w = _dirichlet_gauss_rule(tuple(float(a) for a in np.atleast_1d(alpha)), float(beta), int(npts))
    return _checked_sum(fn(x), w, x)
