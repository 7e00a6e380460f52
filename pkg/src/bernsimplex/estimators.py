"""Bernstein estimators of a c.d.f. and a density on the unit simplex."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.special import gammaln
from scipy.stats import binom

from .simplex import (
    as_points,
    point_batch,
    bin_index,
    ceil_index,
    dirichlet_log_density,
    enumerate_lattice,
    multinomial_log_pmf_table,
    validate_points,
)

# evaluation points are processed in blocks of this many rows
_CHUNK = 2048
# beyond this order the 1-d binomial sums are truncated to a window
_WINDOW_ORDER = 2000


def _dataset(data, d: int | None = None) -> np.ndarray:
    pts = validate_points(data, d)
    if len(pts) == 0:
        raise ValueError("dataset is empty")
    return pts


def empirical_cdf(data, x) -> np.ndarray | float:
    """Fraction of observations ``<= x`` coordinatewise.

    ``x`` may be any point of ``R^d`` (not only the simplex), one point or a
    batch of points.
    """
    data = _dataset(data)
    pts, scalar = point_batch(x, data.shape[1])
    out = np.empty(len(pts))
    for s in range(0, len(pts), _CHUNK):
        block = pts[s:s + _CHUNK]
        out[s:s + _CHUNK] = (data[None, :, :] <= block[:, None, :]).all(axis=2).mean(axis=1)
    return float(out[0]) if scalar else out


def _lattice_sum(values: np.ndarray, m: int, pts: np.ndarray) -> np.ndarray:
    """``sum_k values[k] * P_{k,m}(x)`` for each row of ``pts``.

    ``values`` is aligned with ``enumerate_lattice(m, d)``.
    """
    d = pts.shape[1]
    out = np.empty(len(pts))
    if d == 1 and m > _WINDOW_ORDER:
        # P_{k,m} is negligible (< exp(-700)) more than 40 sd + 40 from the mean
        for row, xv in enumerate(pts[:, 0]):
            half = 40.0 * np.sqrt(m * xv * (1 - xv)) + 40.0
            lo, hi = max(0, int(m * xv - half)), min(m, int(m * xv + half) + 1)
            k = np.arange(lo, hi + 1)
            out[row] = np.dot(values[lo:hi + 1], binom.pmf(k, m, xv))
        return out
    lattice = enumerate_lattice(m, d)
    for s in range(0, len(pts), _CHUNK):
        w = np.exp(multinomial_log_pmf_table(m, pts[s:s + _CHUNK], lattice))
        out[s:s + _CHUNK] = w @ values
    return out


def bernstein_poly(F: Callable[[np.ndarray], np.ndarray], m: int, x,
                   d: int | None = None) -> np.ndarray | float:
    """Bernstein polynomial of order ``m`` of ``F`` evaluated at ``x``.

    ``F`` is called once with the ``(N, d)`` array of lattice points ``k/m``
    and must return ``N`` values.  ``d`` is inferred from ``x`` unless given
    (a 1-d ``x`` is read as one point).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    arr = np.asarray(x, dtype=float)
    if d is None:
        d = arr.shape[1] if arr.ndim == 2 else max(arr.size, 1)
    pts, scalar = point_batch(arr, d)
    nodes = enumerate_lattice(m, pts.shape[1]) / m
    values = np.asarray(F(nodes), dtype=float).reshape(-1)
    out = _lattice_sum(values, m, pts)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class CdfModel:
    """Bernstein c.d.f. estimator of order ``m`` built on a retained sample."""

    data: np.ndarray
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        object.__setattr__(self, "data", _dataset(self.data))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    @cached_property
    def lattice_values(self) -> np.ndarray:
        """``F_n(k/m)`` over ``enumerate_lattice(m, d)``.

        Observation ``X`` satisfies ``X <= k/m`` iff ``ceil_index(X) <= k``,
        so the values are cumulative counts of the ceiling indices.
        """
        m, d = self.m, self.d
        j = ceil_index(self.data, m)
        counts = np.zeros((m + 1,) * d)
        np.add.at(counts, tuple(j.T), 1.0)
        for axis in range(d):
            counts = np.cumsum(counts, axis=axis)
        lattice = enumerate_lattice(m, d)
        out = counts[tuple(lattice.T)] / self.n
        out.setflags(write=False)
        return out


def bernstein_cdf(model: CdfModel, x) -> np.ndarray | float:
    """``F*_{n,m}(x) = sum_k F_n(k/m) P_{k,m}(x)``."""
    pts, scalar = point_batch(x, model.d)
    pts = validate_points(pts)
    out = _lattice_sum(model.lattice_values, model.m, pts)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class DensityModel:
    """Fitted Bernstein density: occupied cells and their proportions.

    Only cells holding at least one observation are stored; ``bins[j]`` is
    the lattice index of the ``j``-th occupied cell and ``counts[j]`` its
    number of observations.
    """

    m: int
    n: int
    d: int
    bins: np.ndarray
    counts: np.ndarray = field(repr=False)

    @property
    def proportions(self) -> np.ndarray:
        return self.counts / self.n

    @property
    def log_scale(self) -> float:
        """``log((m-1+d)! / (m-1)!)``."""
        return float(gammaln(self.m + self.d) - gammaln(self.m))

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {tuple(int(v) for v in k): float(p) for k, p in zip(self.bins, self.proportions)}

    def to_json_obj(self) -> dict:
        return {
            "m": self.m, "n": self.n, "d": self.d,
            "bins": [{"k": [int(v) for v in k], "p": float(p)}
                     for k, p in zip(self.bins, self.proportions)],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "DensityModel":
        m, n, d = int(obj["m"]), int(obj["n"]), int(obj["d"])
        bins = np.array([b["k"] for b in obj["bins"]], dtype=np.int64).reshape(-1, d)
        counts = np.rint(np.array([b["p"] for b in obj["bins"]]) * n)
        return cls(m, n, d, bins, counts)


def fit_density(data, m: int) -> DensityModel:
    """Bin the sample into the cells ``(k/m, (k+1)/m]``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    data = _dataset(data)
    k = bin_index(data, m).reshape(len(data), -1)
    bins, counts = np.unique(k, axis=0, return_counts=True)
    return DensityModel(m, len(data), data.shape[1], bins.astype(np.int64), counts.astype(float))


def density_kernel_matrix(m: int, bins: np.ndarray, x, form: str = "histogram") -> np.ndarray:
    """Per-cell density contributions: ``(q, K)`` array of
    ``((m-1+d)!/(m-1)!) P_{k,m-1}(x)`` (equivalently ``D(k+1, m-||k||_1)(x)``).
    """
    pts = as_points(x, bins.shape[1])
    d = bins.shape[1]
    if form == "histogram":
        log_scale = gammaln(m + d) - gammaln(m)
        return np.exp(log_scale + multinomial_log_pmf_table(m - 1, pts, bins))
    if form == "dirichlet":
        out = np.empty((len(pts), len(bins)))
        for j, k in enumerate(bins):
            out[:, j] = np.exp(dirichlet_log_density(k + 1.0, float(m - k.sum()), pts))
        return out
    raise ValueError(f"unknown form {form!r}; use 'histogram' or 'dirichlet'")


def eval_density(model: DensityModel, x, form: str = "histogram") -> np.ndarray | float:
    """Evaluate the Bernstein density estimator.

    ``form="histogram"`` sums scaled multinomial weights; ``"dirichlet"``
    sums the equivalent Dirichlet mixture components.  Both give the same
    function.
    """
    pts, scalar = point_batch(x, model.d)
    p = model.proportions
    out = np.empty(len(pts))
    for s in range(0, len(pts), _CHUNK):
        out[s:s + _CHUNK] = density_kernel_matrix(model.m, model.bins, pts[s:s + _CHUNK], form) @ p
    return float(out[0]) if scalar else out
