import math

import numpy as np
import pytest
from scipy.stats import norm

from metatpe.kde import KDE, BandwidthRule, select_bandwidths
from metatpe.space import Categorical, Continuous, Ordinal, SearchSpace

from oracles import trapezoid_integral

LINE = SearchSpace((Continuous("x", 0, 1),))
PLANE = SearchSpace((Continuous("x", 0, 1), Continuous("y", 0, 1)))
MIXED = SearchSpace((Continuous("x", 0, 1), Ordinal("n", (1, 2, 4, 8)),
                     Categorical("c", ("a", "b", "c"))))


def test_single_point_bandwidth_is_b_max():
    bw = select_bandwidths(np.array([[0.3]]), LINE)
    assert bw.tolist() == [1.0]


def test_identical_points_hit_lower_clamp():
    bw = select_bandwidths(np.full((100, 1), 0.4), LINE)
    assert bw.tolist() == [1e-3]


def test_bandwidth_formula_value():
    pts = np.random.default_rng(0).random((40, 2))
    sigma = pts.std(axis=0, ddof=1)
    expected = 1.06 * sigma * 40 ** (-1 / 6)
    np.testing.assert_allclose(select_bandwidths(pts, PLANE), expected, rtol=1e-12)


def test_categorical_bandwidth():
    pts = np.zeros((16, 3))
    bw = select_bandwidths(pts, MIXED)
    assert bw[2] == pytest.approx(2 / 3 * 16 ** (-1 / 7))
    assert select_bandwidths(pts[:1], MIXED)[2] == pytest.approx(2 / 3)


def test_bandwidths_shrink_with_n():
    base = np.random.default_rng(1).random((10, 3)) * [1, 1, 0] + [0, 0, 1]
    small = select_bandwidths(base, MIXED)
    big = select_bandwidths(np.tile(base, (10, 1)), MIXED)
    assert np.all(big < small)


def test_empty_points_rejected():
    with pytest.raises(ValueError):
        select_bandwidths(np.empty((0, 1)), LINE)
    with pytest.raises(ValueError):
        KDE(np.empty((0, 1)), LINE)


def test_peak_value_at_center():
    kde = KDE([[0.5]], LINE, bandwidths=[1e-3])
    peak = 1 / (1e-3 * math.sqrt(2 * math.pi))
    assert kde.pdf([0.5]) == pytest.approx(peak, rel=1e-9)
    assert kde.pdf([0.5]) >= kde.pdf([0.5005])


def test_truncated_kernel_renormalized_at_boundary():
    kde = KDE([[0.0]], LINE, bandwidths=[0.1])
    assert kde.pdf([0.0]) == pytest.approx(2 * norm.pdf(0, scale=0.1), rel=1e-9)


def test_categorical_delta_limit():
    space = SearchSpace((Categorical("c", ("a", "b", "c")),))
    kde = KDE([[1.0]], space, bandwidths=[0.0])
    assert kde.pdf([1.0]) == 1.0
    assert kde.pdf([0.0]) == 0.0 and kde.pdf([2.0]) == 0.0


def test_categorical_kernel_values():
    space = SearchSpace((Categorical("c", ("a", "b", "c")),))
    kde = KDE([[0.0]], space, bandwidths=[0.3])
    np.testing.assert_allclose(kde.pdf([[0.0], [1.0], [2.0]]), [0.7, 0.15, 0.15])


@pytest.mark.parametrize("seed", range(5))
def test_1d_quadrature(seed):
    rng = np.random.default_rng(seed)
    pts = rng.random((rng.integers(1, 30), 1))
    kde = KDE(pts, LINE, bandwidths=[rng.uniform(0.01, 1.0)])
    assert abs(trapezoid_integral(lambda x: kde.pdf(x[:, None])) - 1) < 1e-3


def test_2d_quadrature():
    rng = np.random.default_rng(3)
    kde = KDE(rng.random((8, 2)), PLANE)
    xs = np.linspace(0, 1, 801)
    grid = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1).reshape(-1, 2)
    vals = kde.pdf(grid).reshape(len(xs), len(xs))
    total = np.trapezoid(np.trapezoid(vals, xs, axis=1), xs)
    assert abs(total - 1) < 1e-3


def test_mixed_density_normalizes():
    rng = np.random.default_rng(4)
    pts = np.column_stack([rng.random(6), rng.integers(0, 4, 6) / 3, rng.integers(0, 3, 6)])
    kde = KDE(pts, MIXED).reduced([0, 2])
    xs = np.linspace(0, 1, 10_000)
    total = 0.0
    for c in range(3):
        u = np.column_stack([xs, np.zeros_like(xs), np.full_like(xs, c)])
        total += np.trapezoid(kde.pdf(u), xs)
    assert abs(total - 1) < 1e-3


def test_kernel_mass_concentrates_at_b_min():
    kde = KDE([[0.37]], LINE, bandwidths=[1e-3])
    xs = np.linspace(0.37 - 5e-3, 0.37 + 5e-3, 10_001)
    assert np.trapezoid(kde.pdf(xs[:, None]), xs) >= 0.99


def test_pdf_nonnegative():
    rng = np.random.default_rng(9)
    kde = KDE(rng.random((5, 3)) * [1, 1, 2], MIXED)
    u = MIXED.sample_unit(rng, 500)
    assert np.all(kde.pdf(u) >= 0)


def test_samples_concentrate_with_tiny_bandwidth():
    kde = KDE([[0.6]], LINE, bandwidths=[1e-3])
    s = kde.sample(10_000, np.random.default_rng(0))
    assert abs(s.mean() - 0.6) < 3e-3


def test_center_assignment_is_uniform():
    kde = KDE([[0.2], [0.8]], LINE, bandwidths=[0.01])
    s = kde.sample(100_000, np.random.default_rng(1))
    assert abs(np.mean(s < 0.5) - 0.5) < 0.01


def test_samples_stay_in_unit_cube():
    kde = KDE([[0.0, 1.0], [1.0, 0.0]], PLANE, bandwidths=[1.0, 1.0])
    s = kde.sample(5000, np.random.default_rng(2))
    assert np.all((s >= 0) & (s <= 1))


def test_categorical_sampling_keeps_center_with_probability():
    space = SearchSpace((Categorical("c", ("a", "b", "c", "d")),))
    kde = KDE([[2.0]], space, bandwidths=[0.4])
    s = kde.sample(100_000, np.random.default_rng(3))[:, 0]
    freq = np.bincount(s.astype(int), minlength=4) / len(s)
    np.testing.assert_allclose(freq, [0.4 / 3, 0.4 / 3, 0.6, 0.4 / 3], atol=0.01)


def test_histogram_matches_pdf():
    rng = np.random.default_rng(6)
    kde = KDE(rng.random((5, 1)), LINE)
    s = kde.sample(100_000, rng)[:, 0]
    edges = np.linspace(0, 1, 51)
    hist = np.histogram(s, bins=edges)[0] / len(s)
    mass = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs = np.linspace(lo, hi, 201)
        mass.append(np.trapezoid(kde.pdf(xs[:, None]), xs))
    assert 0.5 * np.abs(hist - np.array(mass)).sum() < 0.05


def test_reduced_to_all_dims_is_identity():
    rng = np.random.default_rng(7)
    kde = KDE(rng.random((10, 2)), PLANE)
    u = rng.random((100, 2))
    np.testing.assert_allclose(kde.reduced([0, 1]).pdf(u), kde.pdf(u), rtol=1e-12)


def test_reduced_to_nothing_is_uniform():
    kde = KDE(np.random.default_rng(8).random((10, 2)), PLANE)
    np.testing.assert_array_equal(kde.reduced([]).pdf(np.random.default_rng(0).random((50, 2))), 1.0)


def test_reduced_matches_direct_1d():
    rng = np.random.default_rng(10)
    pts = rng.random((12, 2))
    full = KDE(pts, PLANE)
    direct = KDE(pts[:, :1], LINE, bandwidths=full.bandwidths[:1])
    u = rng.random((100, 2))
    np.testing.assert_allclose(full.reduced([0]).pdf(u), direct.pdf(u[:, :1]), rtol=1e-12)


def test_reduced_sampling_inactive_dims_uniform():
    kde = KDE([[0.5, 0.5]], PLANE, bandwidths=[1e-3, 1e-3]).reduced([0])
    s = kde.sample(20_000, np.random.default_rng(11))
    assert abs(s[:, 0].mean() - 0.5) < 3e-3
    assert abs(s[:, 1].std() - math.sqrt(1 / 12)) < 0.01


def test_marginal_equals_reduced():
    rng = np.random.default_rng(12)
    kde = KDE(rng.random((10, 2)), PLANE)
    xs = rng.random(30)
    u = np.column_stack([xs, rng.random(30)])
    np.testing.assert_allclose(kde.marginal_pdf(0, xs), kde.reduced([0]).pdf(u), rtol=1e-12)


def test_marginal_of_spread_points_is_flat():
    pts = np.linspace(0, 1, 100)[:, None]
    kde = KDE(pts, LINE, bandwidths=[1.0])
    assert np.all(np.abs(kde.marginal_pdf(0, np.linspace(0, 1, 101)) - 1) < 0.1)


def test_marginal_categorical_value():
    kde = KDE([[0.1, 0.0, 1.0]], MIXED, bandwidths=[0.1, 0.1, 0.25])
    assert kde.marginal_pdf(2, 1.0) == pytest.approx(0.75)


def test_marginal_requires_active_dim():
    kde = KDE([[0.5, 0.5]], PLANE).reduced([1])
    with pytest.raises(ValueError):
        kde.marginal_pdf(0, 0.5)


def test_bandwidth_rule_validation():
    with pytest.raises(ValueError):
        BandwidthRule(b_min=0.0)
    with pytest.raises(ValueError):
        BandwidthRule(b_min=0.5, b_max=0.1)
