"""Data-driven choice of the order ``m`` for the Bernstein density estimator.

Both criteria rely on leave-one-out estimators.  Removing observation ``i``
only changes the proportion of the cell holding it, so

    f^{(-i)}(x) = (n f(x) - w_{k_i}(x)) / (n - 1),

where ``w_k(x) = ((m-1+d)!/(m-1)!) P_{k,m-1}(x)`` and ``k_i`` is the cell of
``X_i``.  No refit is needed.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import gammaln

from .estimators import DensityModel, _dataset, density_kernel_matrix, fit_density
from .simplex import bin_index, point_batch


def _loo_at_data(data: np.ndarray, m: int) -> tuple[DensityModel, np.ndarray]:
    """Fitted model and ``f^{(-i)}(X_i)`` for every ``i``."""
    n = len(data)
    if n < 2:
        raise ValueError("leave-one-out needs at least two observations")
    model = fit_density(data, m)
    own = bin_index(data, m).reshape(n, -1)
    # position of each observation's cell among the occupied bins
    lookup = {tuple(k): j for j, k in enumerate(model.bins.tolist())}
    pos = np.array([lookup[tuple(k)] for k in own.tolist()])
    kern = density_kernel_matrix(m, model.bins, data)
    full = kern @ model.proportions
    self_term = kern[np.arange(n), pos]
    loo = (n * full - self_term) / (n - 1)
    return model, np.maximum(loo, 0.0)


def loo_density(data, m: int, i: int, x) -> np.ndarray | float:
    """Estimator refitted without observation ``i`` (0-based), evaluated at ``x``."""
    data = _dataset(data)
    n, d = data.shape
    if n < 2:
        raise ValueError("leave-one-out needs at least two observations")
    if not 0 <= i < n:
        raise IndexError(f"observation index {i} out of range for n={n}")
    model = fit_density(data, m)
    pts, single = point_batch(x, d)
    kern = density_kernel_matrix(m, model.bins, pts)
    k_i = bin_index(data[i], m).reshape(1, d)
    w_i = density_kernel_matrix(m, k_i, pts)[:, 0]
    out = np.maximum((n * (kern @ model.proportions) - w_i) / (n - 1), 0.0)
    return float(out[0]) if single else out


def _log_binom(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return gammaln(a + 1.0) - gammaln(b + 1.0) - gammaln(a - b + 1.0)


def gram_matrix(m: int, bins: np.ndarray) -> np.ndarray:
    """``G[k, l] = int_S w_k w_l`` for the scaled kernels of order ``m``.

    With ``r = m - 1``, ``int P_{k,r} P_{l,r}`` follows from the Dirichlet
    moment identity and the scaled version simplifies to

        ((r+d)!)^2/(2r+d)! * C(2r-|k|-|l|, r-|k|) * prod_i C(k_i+l_i, k_i).
    """
    bins = np.asarray(bins, dtype=float)
    r, d = m - 1, bins.shape[1]
    size = bins.sum(axis=1)
    log_c = 2 * gammaln(r + d + 1.0) - gammaln(2 * r + d + 1.0)
    tot = size[:, None] + size[None, :]
    log_g = log_c + _log_binom(2 * r - tot, r - size[:, None])
    for i in range(d):
        ki, li = bins[:, i][:, None], bins[:, i][None, :]
        log_g = log_g + _log_binom(ki + li, ki)
    return np.exp(log_g)


def squared_integral(model: DensityModel) -> float:
    """``int_S f^2`` exactly, as a quadratic form over the occupied cells."""
    p = model.proportions
    return float(p @ gram_matrix(model.m, model.bins) @ p)


def lscv_score(data, m: int) -> float:
    """Least-squares cross-validation score (smaller is better).

    ``int f^2 - (2/n) sum_i f^{(-i)}(X_i)``, with the first term computed
    exactly by :func:`squared_integral`.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    data = _dataset(data)
    model, loo = _loo_at_data(data, m)
    return squared_integral(model) - 2.0 * float(np.mean(loo))


def lcv_score(data, m: int) -> float:
    """Likelihood cross-validation score ``n^{-1} sum_i log f^{(-i)}(X_i)``.

    Returns ``-inf`` when some held-out observation gets zero density.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    data = _dataset(data)
    _, loo = _loo_at_data(data, m)
    if (loo <= 0).any():
        return -math.inf
    return float(np.mean(np.log(loo)))


SCORES = {"lscv": lscv_score, "lcv": lcv_score}


@dataclass
class SelectionResult:
    method: str
    grid: list[int]
    scores: list[float]
    chosen_m: int

    def to_json(self) -> str:
        obj = asdict(self)
        # JSON has no infinities; encode them as null
        obj["scores"] = [s if math.isfinite(s) else None for s in self.scores]
        return json.dumps(obj, indent=2)


def default_grid(n: int, d: int, count: int = 20, m_min: int = 2, m_max: int | None = None,
                 include: int | None = None) -> list[int]:
    """Geometric grid from ``m_min`` to ``ceil(4 n^{2/(d+4)})``.

    ``include`` (typically a rounded asymptotic optimum) is always added.
    """
    if m_max is None:
        m_max = math.ceil(4 * n ** (2 / (d + 4)))
    if m_min < 1 or m_max < m_min:
        raise ValueError(f"bad grid bounds [{m_min}, {m_max}]")
    pts = np.geomspace(m_min, m_max, max(count, 1))
    grid = set(int(v) for v in np.unique(np.rint(pts)))
    grid.update((m_min, m_max))
    if include is not None and include >= 1:
        grid.add(int(include))
    return sorted(grid)


def select_bandwidth(data, grid, method: str = "lscv", workers: int = 1) -> SelectionResult:
    """Evaluate the score on every ``m`` in ``grid`` and pick the best.

    LSCV is minimised, LCV maximised.  Ties go to the smaller ``m``; LCV
    values of ``-inf`` are never chosen unless all of them are.  With
    ``workers > 1`` the grid is scored by a thread pool; the result does not
    depend on ``workers``.
    """
    grid = sorted(int(m) for m in grid)
    if not grid:
        raise ValueError("grid is empty")
    if grid[0] < 1:
        raise ValueError("grid values must be >= 1")
    data = _dataset(data)
    if method not in SCORES:
        raise ValueError(f"unknown method {method!r}; use 'lscv' or 'lcv'")
    score = SCORES[method]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            scores = list(pool.map(lambda m: score(data, m), grid))
    else:
        scores = [score(data, m) for m in grid]
    if method == "lscv":
        best = int(np.argmin(scores))
    else:
        if not any(math.isfinite(s) for s in scores):
            raise ValueError("every LCV score is -inf on this grid")
        best = int(np.argmax(scores))
    return SelectionResult(method, grid, [float(s) for s in scores], grid[best])
