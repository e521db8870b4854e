"""Product-kernel density estimation over unit-scaled configurations.

Numerical dimensions (continuous and ordinal) use a Gaussian kernel truncated
to ``[0, 1]`` and renormalized per center.  Categorical dimensions use the
Aitchison-Aitken kernel, so densities are taken with respect to Lebesgue
measure on numerical dimensions times counting measure on categories.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy.special import logsumexp, ndtr

from .space import SearchSpace

_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)
_MAX_REJECTION_ROUNDS = 100


@dataclass(frozen=True)
class BandwidthRule:
    """Normal-reference rule ``1.06 * sigma * n ** (-1 / (D + 4))`` with clamps."""

    b_min: float = 1e-3
    b_max: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.b_min <= self.b_max:
            raise ValueError("need 0 < b_min <= b_max")


def select_bandwidths(points: np.ndarray, space: SearchSpace,
                      rule: BandwidthRule = BandwidthRule()) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(points)
    if n == 0:
        raise ValueError("bandwidth selection needs at least one point")
    factor = n ** (-1.0 / (space.dim + 4))
    bw = np.empty(space.dim)
    for d, p in enumerate(space.params):
        if p.is_categorical:
            top = (p.n_categories - 1) / p.n_categories
            bw[d] = min(top, top * factor)
        else:
            sigma = points[:, d].std(ddof=1) if n >= 2 else 1.0
            bw[d] = min(max(1.06 * sigma * factor, rule.b_min), rule.b_max)
    return bw


def _log_trunc_gauss(x: np.ndarray, centers: np.ndarray, b: float) -> np.ndarray:
    """log kernel values, shape (len(x), len(centers))."""
    z = (x[:, None] - centers[None, :]) / b
    mass = ndtr((1.0 - centers) / b) - ndtr(-centers / b)
    return -0.5 * z * z - _LOG_SQRT_2PI - math.log(b) - np.log(mass)[None, :]


def _logsumexp_rows(a: np.ndarray) -> np.ndarray:
    top = a.max(axis=1)
    top = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(divide="ignore"):
        return top + np.log(np.exp(a - top[:, None]).sum(axis=1))


def _log_aitchison_aitken(x: np.ndarray, centers: np.ndarray, b: float, k: int) -> np.ndarray:
    same = x[:, None] == centers[None, :]
    with np.errstate(divide="ignore"):
        return np.where(same, np.log1p(-b), math.log(b / (k - 1)) if b > 0 else -np.inf)


class KDE:
    """Kernel density estimator over a subset of the space's dimensions.

    ``points`` are unit configs (rows).  ``active_dims`` restricts the kernel
    product; inactive dimensions contribute a constant factor of one.
    """

    def __init__(self, points, space: SearchSpace, bandwidths: Optional[np.ndarray] = None,
                 active_dims: Optional[Iterable[int]] = None,
                 rule: BandwidthRule = BandwidthRule()):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.size == 0 or len(pts) == 0:
            raise ValueError("a KDE needs at least one point")
        if pts.shape[1] != space.dim:
            raise ValueError(f"points have {pts.shape[1]} columns, space has {space.dim}")
        self.points = pts
        self.points.setflags(write=False)
        self.space = space
        self.rule = rule
        if bandwidths is None:
            bandwidths = select_bandwidths(pts, space, rule)
        self.bandwidths = np.asarray(bandwidths, dtype=float)
        self.bandwidths.setflags(write=False)
        dims = range(space.dim) if active_dims is None else active_dims
        self.active_dims = tuple(sorted(set(int(d) for d in dims)))
        if any(not 0 <= d < space.dim for d in self.active_dims):
            raise ValueError(f"active dims {self.active_dims} outside [0, {space.dim})")
        # repeated points (common on discrete spaces) become one weighted center
        active = list(self.active_dims)
        if active:
            centers, counts = np.unique(pts[:, active], axis=0, return_counts=True)
        else:
            centers, counts = np.zeros((1, 0)), np.array([len(pts)])
        self._centers = np.zeros((len(centers), space.dim))
        self._centers[:, active] = centers
        self._log_counts = np.log(counts)

    @property
    def n(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        return f"KDE(n={self.n}, active_dims={self.active_dims})"

    def _log_kernel(self, d: int, x: np.ndarray, centers: Optional[np.ndarray] = None) -> np.ndarray:
        p = self.space.params[d]
        if centers is None:
            centers = self._centers[:, d]
        if p.is_categorical:
            return _log_aitchison_aitken(x, centers, self.bandwidths[d], p.n_categories)
        return _log_trunc_gauss(x, centers, self.bandwidths[d])

    def log_pdf(self, u) -> np.ndarray:
        """Log density at each row of ``u`` (a single unit config gives a 0-d result)."""
        u = np.asarray(u, dtype=float)
        single = u.ndim == 1
        u = np.atleast_2d(u)
        total = np.broadcast_to(self._log_counts, (len(u), len(self._log_counts))).copy()
        for d in self.active_dims:
            total += self._log_kernel(d, u[:, d])
        out = _logsumexp_rows(total) - math.log(self.n)
        return out[0] if single else out

    def pdf(self, u) -> np.ndarray:
        return np.exp(self.log_pdf(u))

    def reduced(self, dims: Iterable[int]) -> "KDE":
        return KDE(self.points, self.space, self.bandwidths, active_dims=dims, rule=self.rule)

    def marginal_pdf(self, dim: int, x) -> np.ndarray:
        """Density of the marginal along ``dim`` (a one-dimensional KDE)."""
        if dim not in self.active_dims:
            raise ValueError(f"dimension {dim} is not active in {self!r}")
        x = np.asarray(x, dtype=float)
        log_k = self._log_kernel(dim, np.atleast_1d(x), self.points[:, dim])
        vals = np.exp(logsumexp(log_k, axis=1) - math.log(self.n))
        return vals[0] if x.ndim == 0 else vals

    def sample(self, n_samples: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``n_samples`` unit configs; inactive dimensions are drawn uniformly."""
        if n_samples < 1:
            raise ValueError("n_samples must be positive")
        out = self.space.sample_unit(rng, n_samples)
        centers = self.points[rng.integers(self.n, size=n_samples)]
        for d in self.active_dims:
            p = self.space.params[d]
            b = self.bandwidths[d]
            c = centers[:, d]
            if p.is_categorical:
                k = p.n_categories
                move = rng.random(n_samples) < b
                # shift by 1..K-1 picks uniformly among the other categories
                shift = rng.integers(1, k, size=n_samples)
                out[:, d] = np.where(move, (c + shift) % k, c)
            else:
                out[:, d] = _sample_trunc_gauss(c, b, rng)
        return out


def _sample_trunc_gauss(centers: np.ndarray, b: float, rng: np.random.Generator) -> np.ndarray:
    x = centers + b * rng.standard_normal(len(centers))
    bad = (x < 0) | (x > 1)
    rounds = 0
    while bad.any() and rounds < _MAX_REJECTION_ROUNDS:
        idx = np.flatnonzero(bad)
        x[idx] = centers[idx] + b * rng.standard_normal(len(idx))
        bad[idx] = (x[idx] < 0) | (x[idx] > 1)
        rounds += 1
    return np.clip(x, 0.0, 1.0)


def fit_kde(points, space: SearchSpace, rule: BandwidthRule = BandwidthRule()) -> KDE:
    return KDE(points, space, rule=rule)
