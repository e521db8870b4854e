"""Task similarity from the top-quantile KDEs of each task.

The pipeline: score each dimension by how far its marginal top-quantile
density departs from uniform, keep the most important dimensions, measure
the total-variation distance between reduced densities of the target and
every meta-task, and turn the distances into task-kernel weights.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .kde import KDE, BandwidthRule
from .space import SearchSpace


@dataclass(frozen=True)
class HpiScores:
    per_task: np.ndarray  # (T, D)
    averaged: np.ndarray  # (D,)


@dataclass(frozen=True)
class TaskKernelMatrix:
    weights: np.ndarray  # (T, T); row 0 is the target task
    similarities: np.ndarray  # (T - 1,) target vs each meta-task
    dims: tuple[int, ...] = ()
    tv_distances: np.ndarray = field(default_factory=lambda: np.empty(0))
    hpi: Optional[HpiScores] = None

    @property
    def target_row(self) -> np.ndarray:
        return self.weights[0]


def hpi_scores(kdes: Sequence[KDE], gamma: float, n_mc: int,
               rng: np.random.Generator) -> HpiScores:
    """Importance ``gamma**2 * E_u[(p_d(x) / u(x) - 1)**2]`` of every dimension per task.

    Continuous dimensions use ``n_mc`` uniform draws shared across tasks;
    ordinal and categorical dimensions are averaged exactly over their levels.
    Categorical marginals are probability masses, so they are scaled by ``K``
    to compare against the uniform density on the relaxed domain.
    """
    if not kdes:
        raise ValueError("need at least one KDE")
    if n_mc < 1:
        raise ValueError("n_mc must be positive")
    space = kdes[0].space
    scores = np.zeros((len(kdes), space.dim))
    for d, p in enumerate(space.params):
        if p.kind == "continuous":
            xs, scale = rng.random(n_mc), 1.0
        elif p.kind == "ordinal":
            xs, scale = np.linspace(0.0, 1.0, p.cardinality), 1.0
        else:
            xs, scale = np.arange(p.n_categories, dtype=float), float(p.n_categories)
        for m, kde in enumerate(kdes):
            ratio = scale * kde.marginal_pdf(d, xs)
            scores[m, d] = gamma**2 * np.mean((ratio - 1.0) ** 2)
    return HpiScores(scores, scores.mean(axis=0))


def select_dimensions(averaged: np.ndarray, n_dl_target: int, eta: float) -> tuple[int, ...]:
    """Indices of the ``floor(log_eta n)`` most important dimensions, ascending."""
    if eta <= 1:
        raise ValueError("eta must exceed 1")
    if n_dl_target < 1:
        raise ValueError("n_dl_target must be positive")
    averaged = np.asarray(averaged, dtype=float)
    # the tolerance keeps exact powers of eta (e.g. log_2.5 6.25) from rounding down
    k = math.floor(math.log(n_dl_target) / math.log(eta) + 1e-9)
    k = min(max(k, 0), len(averaged))
    order = np.argsort(-averaged, kind="stable")
    return tuple(sorted(int(d) for d in order[:k]))


def tv_distance(p: KDE, q: KDE, n_mc: int, rng: np.random.Generator) -> float:
    """Monte-Carlo total-variation distance using the even p/q mixture as proposal."""
    if p.space != q.space or p.active_dims != q.active_dims:
        raise ValueError("tv_distance needs KDEs over the same space and active dimensions")
    if n_mc < 2 or n_mc % 2:
        raise ValueError("n_mc must be an even number >= 2")
    if p is q:
        return 0.0
    half = n_mc // 2
    x = np.vstack([p.sample(half, rng), q.sample(half, rng)])
    lp, lq = p.log_pdf(x), q.log_pdf(x)
    top = np.maximum(lp, lq)
    finite = np.isfinite(top)
    ep = np.where(finite, np.exp(lp - np.where(finite, top, 0.0)), 0.0)
    eq = np.where(finite, np.exp(lq - np.where(finite, top, 0.0)), 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(finite, np.abs(ep - eq) / (0.5 * ep + 0.5 * eq), 0.0)
    return float(min(max(0.5 * w.mean(), 0.0), 1.0))


def gamma_set_similarity(d_tv: float) -> float:
    if not 0.0 <= d_tv <= 1.0:
        raise ValueError(f"total-variation distance must lie in [0, 1], got {d_tv}")
    return (1.0 - d_tv) / (1.0 + d_tv)


def task_kernel(similarities: Sequence[float], n_tasks: int) -> TaskKernelMatrix:
    """Task-kernel weights from the target-vs-meta similarities.

    Meta-vs-meta similarities are never estimated; their off-diagonal entries
    are zero, so every row still sums to one.  Only row 0 feeds the optimizer.
    """
    s = np.asarray(similarities, dtype=float).reshape(-1)
    if n_tasks < 1 or len(s) != n_tasks - 1:
        raise ValueError(f"need {n_tasks - 1} similarities for {n_tasks} tasks, got {len(s)}")
    if np.any((s < 0) | (s > 1)) or np.any(np.isnan(s)):
        raise ValueError("similarities must lie in [0, 1]")
    w = np.zeros((n_tasks, n_tasks))
    w[0, 1:] = w[1:, 0] = s / n_tasks
    w[0, 0] = 1.0 - s.sum() / n_tasks
    w[np.arange(1, n_tasks), np.arange(1, n_tasks)] = 1.0 - s / n_tasks
    return TaskKernelMatrix(w, s)


def task_kernel_from_kdes(dl_kdes: Sequence[KDE], gamma: float, eta: float, n_mc: int,
                          rng: np.random.Generator) -> TaskKernelMatrix:
    """Task kernel from prebuilt top-quantile KDEs; ``dl_kdes[0]`` is the target."""
    n_tasks = len(dl_kdes)
    if n_tasks == 0:
        raise ValueError("need at least the target task")
    if n_tasks == 1:
        return TaskKernelMatrix(np.ones((1, 1)), np.empty(0))
    hpi = hpi_scores(dl_kdes, gamma, n_mc, rng)
    dims = select_dimensions(hpi.averaged, dl_kdes[0].n, eta)
    reduced = [k.reduced(dims) for k in dl_kdes]
    streams = rng.spawn(n_tasks - 1)
    if dims:
        d_tv = np.array([tv_distance(reduced[0], r, n_mc, s)
                         for r, s in zip(reduced[1:], streams)])
    else:
        # every reduced density is the constant one
        d_tv = np.zeros(n_tasks - 1)
    sims = np.array([gamma_set_similarity(d) for d in d_tv])
    kernel = task_kernel(sims, n_tasks)
    return TaskKernelMatrix(kernel.weights, sims, dims, d_tv, hpi)


def compute_task_kernel(dl_sets: Sequence[np.ndarray], space: SearchSpace, gamma: float,
                        eta: float, n_mc: int, rng: np.random.Generator,
                        rule: BandwidthRule = BandwidthRule()) -> TaskKernelMatrix:
    """End-to-end task kernel from the unit-scaled top-quantile points of each task."""
    if any(len(np.atleast_2d(d)) == 0 for d in dl_sets):
        raise ValueError("every top-quantile set must be non-empty")
    kdes = [KDE(d, space, rule=rule) for d in dl_sets]
    return task_kernel_from_kdes(kdes, gamma, eta, n_mc, rng)
