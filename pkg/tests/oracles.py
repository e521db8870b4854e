"""Slow, independent reference computations used to freeze and check expected values."""
import numpy as np


def brute_force_ranks(f):
    f = np.asarray(f, dtype=float)
    n = len(f)
    ranks = [-1] * n
    remaining = set(range(n))
    r = 0
    while remaining:
        front = [
            i for i in remaining
            if not any(all(f[j] <= f[i]) and any(f[j] < f[i]) for j in remaining if j != i)
        ]
        for i in front:
            ranks[i] = r
        remaining -= set(front)
        r += 1
    return np.array(ranks)


def grid_hv(points, f_min, f_max, cells=1000):
    """Fraction of a cells x cells grid of cell centers dominated in goodness space."""
    g = np.clip((np.asarray(f_max) - np.asarray(points)) / (np.asarray(f_max) - np.asarray(f_min)), 0, 1)
    centers = (np.arange(cells) + 0.5) / cells
    covered = np.zeros((cells, cells), dtype=bool)
    for g1, g2 in g:
        covered[: int(np.searchsorted(centers, g1, side="right")),
                : int(np.searchsorted(centers, g2, side="right"))] = True
    return covered.mean()


def trapezoid_integral(fn, n=10_000):
    xs = np.linspace(0.0, 1.0, n)
    return np.trapezoid(fn(xs), xs)


def chain_ranks(f):
    """Rank as the length of the longest dominance chain ending at each point.

    A dominator always has a strictly smaller coordinate sum, so visiting
    points by increasing sum settles every dominator first.
    """
    f = np.asarray(f, dtype=float)
    dom = np.all(f[:, None, :] <= f[None, :, :], axis=2) & np.any(f[:, None, :] < f[None, :, :], axis=2)
    ranks = np.zeros(len(f), dtype=int)
    for i in np.argsort(f.sum(axis=1), kind="stable"):
        above = np.flatnonzero(dom[:, i])
        ranks[i] = ranks[above].max() + 1 if len(above) else 0
    return ranks
