"""Nondomination ranking, crowding distance, the quantile split and quality indicators.

All functions assume minimization.  Callers negate maximized objectives
before handing vectors in (the benchmarks module does this on lookup).
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np


class UnsupportedDimensionError(ValueError):
    pass


def _as_matrix(objs) -> np.ndarray:
    arr = np.asarray(objs, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"objective vectors must form an (n, M) array, got shape {arr.shape}")
    return arr


def _stack(objs) -> np.ndarray:
    if isinstance(objs, np.ndarray):
        return _as_matrix(objs)
    sizes = {np.size(o) for o in objs}
    if len(sizes) > 1:
        raise ValueError(f"objective vectors have mixed lengths {sorted(sizes)}")
    return _as_matrix([np.atleast_1d(o) for o in objs]) if len(objs) else np.empty((0, 1))


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    return bool(np.all(a <= b) and np.any(a < b))


def nondomination_rank(objs) -> np.ndarray:
    """Front index of every point (0 = nondominated set)."""
    f = _stack(objs)
    n = len(f)
    if n == 0:
        return np.empty(0, dtype=int)
    if f.shape[1] == 1:
        # one objective: rank = number of distinct strictly better values
        _, inverse = np.unique(f[:, 0], return_inverse=True)
        return inverse.reshape(-1).astype(int)

    le = np.all(f[:, None, :] <= f[None, :, :], axis=2)
    lt = np.any(f[:, None, :] < f[None, :, :], axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    n_dominators = dom.sum(axis=0)
    ranks = np.full(n, -1, dtype=int)
    current = np.flatnonzero(n_dominators == 0)
    r = 0
    while current.size:
        ranks[current] = r
        n_dominators = n_dominators - dom[current].sum(axis=0)
        n_dominators[ranks >= 0] = -1
        current = np.flatnonzero(n_dominators == 0)
        r += 1
    return ranks


def crowding_distance(front) -> np.ndarray:
    """NSGA-II crowding distance of the points in one front."""
    f = _stack(front)
    n, m = f.shape
    dist = np.zeros(n)
    if n == 0:
        return dist
    if n <= 2:
        return np.full(n, np.inf)
    for k in range(m):
        order = np.argsort(f[:, k], kind="stable")
        vals = f[order, k]
        dist[order[0]] = dist[order[-1]] = np.inf
        span = vals[-1] - vals[0]
        if span <= 0:
            continue
        dist[order[1:-1]] += (vals[2:] - vals[:-2]) / span
    return dist


def rank_order(objs) -> np.ndarray:
    """Indices sorted best-first by (front asc, crowding desc, insertion asc)."""
    f = _stack(objs)
    n = len(f)
    if n == 0:
        return np.empty(0, dtype=int)
    if f.shape[1] == 1:
        return np.argsort(f[:, 0], kind="stable")
    ranks = nondomination_rank(f)
    crowd = np.empty(n)
    for r in np.unique(ranks):
        idx = np.flatnonzero(ranks == r)
        crowd[idx] = crowding_distance(f[idx])
    return np.lexsort((np.arange(n), -crowd, ranks))


def n_below(n: int, gamma: float) -> int:
    """``ceil(gamma * n)`` guarded against binary-float overshoot such as 0.1 * 30."""
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    return max(1, math.ceil(round(gamma * n, 9))) if n > 0 else 0


def split_indices(objs, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Indices of the best ``ceil(gamma * n)`` observations and of the rest."""
    f = _stack(objs)
    if len(f) == 0:
        raise ValueError("cannot split an empty set of observations")
    order = rank_order(f)
    k = n_below(len(f), gamma)
    return order[:k], order[k:]


def split_observations(obs: Sequence, gamma: float) -> tuple[list, list]:
    """Split observations into the top-gamma group and the remainder."""
    if not obs:
        raise ValueError("cannot split an empty set of observations")
    lower, upper = split_indices([o.objectives for o in obs], gamma)
    return [obs[i] for i in lower], [obs[i] for i in upper]


def _goodness(objs, f_min, f_max) -> np.ndarray:
    f = _stack(objs)
    f_min = np.atleast_1d(np.asarray(f_min, dtype=float))
    f_max = np.atleast_1d(np.asarray(f_max, dtype=float))
    m = f.shape[1]
    if m > 2:
        raise UnsupportedDimensionError(f"hypervolume supports M <= 2, got M = {m}")
    if f_min.shape != (m,) or f_max.shape != (m,):
        raise ValueError("f_min and f_max must have one entry per objective")
    if np.any(f_max <= f_min):
        raise ValueError("need f_min < f_max in every objective")
    return np.clip((f_max - f) / (f_max - f_min), 0.0, 1.0)


def normalized_hv(objs, f_min, f_max) -> float:
    """Area of the unit square dominated by the points after min-max normalization."""
    g = _goodness(objs, f_min, f_max)
    if len(g) == 0:
        return 0.0
    if g.shape[1] == 1:
        return float(g[:, 0].max())
    # sweep from the largest first goodness downwards
    order = np.lexsort((-g[:, 1], -g[:, 0]))
    area, reach = 0.0, 0.0
    for g1, g2 in g[order]:
        if g2 > reach:
            area += g1 * (g2 - reach)
            reach = g2
    return float(area)


def hv_curve(objs, f_min, f_max) -> np.ndarray:
    """Normalized HV of every prefix of ``objs`` (cumulative best-so-far)."""
    f = _stack(objs)
    return np.array([normalized_hv(f[: i + 1], f_min, f_max) for i in range(len(f))])


def pareto_front(objs) -> np.ndarray:
    f = _stack(objs)
    if len(f) == 0:
        return f
    front = np.unique(f[nondomination_rank(f) == 0], axis=0)
    return front[np.lexsort(front.T[::-1])]


def attainment_surface(runs: Sequence, level: int) -> np.ndarray:
    """Minimal points of the region weakly dominated by at least ``level`` runs.

    Computed on the grid spanned by every observed coordinate; the result is
    sorted by the first objective.
    """
    fronts = [_stack(r) for r in runs]
    if not fronts:
        raise ValueError("need at least one run")
    if any(f.shape[1] != 2 for f in fronts if len(f)):
        raise UnsupportedDimensionError("attainment surfaces are defined for M = 2 only")
    if not 1 <= level <= len(fronts):
        raise ValueError(f"level must lie in [1, {len(fronts)}]")
    pts = np.vstack([f for f in fronts if len(f)])
    xs, ys = np.unique(pts[:, 0]), np.unique(pts[:, 1])
    count = np.zeros((len(xs), len(ys)), dtype=int)
    for f in fronts:
        if len(f) == 0:
            continue
        hit = ((f[:, None, None, 0] <= xs[None, :, None]) & (f[:, None, None, 1] <= ys[None, None, :]))
        count += hit.any(axis=0)
    ii, jj = np.nonzero(count >= level)
    attained = np.column_stack([xs[ii], ys[jj]])
    return pareto_front(attained) if len(attained) else np.empty((0, 2))


def attainment_surface_50(runs: Sequence) -> np.ndarray:
    """Median attainment surface: points attained by a strict majority of runs."""
    return attainment_surface(runs, len(runs) // 2 + 1)
