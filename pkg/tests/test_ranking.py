import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from metatpe.ranking import (UnsupportedDimensionError, attainment_surface_50,
                             crowding_distance, n_below, nondomination_rank, normalized_hv,
                             rank_order, split_indices, split_observations)
from metatpe.space import Observation

from oracles import brute_force_ranks, chain_ranks, grid_hv


def test_single_point_rank():
    assert nondomination_rank([[1.0, 2.0]]).tolist() == [0]


def test_small_rank_example():
    assert nondomination_rank([[1, 2], [2, 1], [3, 3]]).tolist() == [0, 0, 1]


def test_ranks_match_brute_force():
    rng = np.random.default_rng(0)
    f = rng.random((50, 2))
    np.testing.assert_array_equal(nondomination_rank(f), brute_force_ranks(f))


@given(arrays(float, st.tuples(st.integers(1, 25), st.integers(1, 3)),
              elements=st.integers(0, 3).map(float)))
@settings(max_examples=60, deadline=None)
def test_chain_oracle_agrees_with_peeling_oracle(f):
    np.testing.assert_array_equal(chain_ranks(f), brute_force_ranks(f))


def test_mixed_lengths_rejected():
    with pytest.raises(ValueError):
        nondomination_rank([np.array([1.0, 2.0]), np.array([1.0])])


@given(arrays(float, st.tuples(st.integers(1, 30), st.integers(1, 3)),
              elements=st.integers(0, 4).map(float)))
@settings(max_examples=60, deadline=None)
def test_ranks_match_brute_force_with_ties(f):
    np.testing.assert_array_equal(nondomination_rank(f), brute_force_ranks(f))


def test_crowding_small_fronts_are_boundaries():
    assert np.all(np.isinf(crowding_distance([[0, 1], [1, 0]])))
    assert np.all(np.isinf(crowding_distance([[0, 1]])))
    assert crowding_distance(np.empty((0, 2))).size == 0


def test_crowding_middle_point():
    d = crowding_distance([[0, 2], [1, 1], [2, 0]])
    assert np.isinf(d[0]) and np.isinf(d[2])
    assert d[1] == 2.0


def test_crowding_identical_points():
    d = crowding_distance([[1, 1]] * 4)
    assert np.isinf(d).sum() == 2
    assert np.all(d[~np.isinf(d)] == 0)


@pytest.mark.parametrize("n, gamma, expected", [(10, 0.1, 1), (5, 0.1, 1), (25, 0.1, 3),
                                                (30, 0.1, 3), (1, 0.1, 1), (7, 1.0, 7)])
def test_split_sizes(n, gamma, expected):
    assert n_below(n, gamma) == expected
    lower, upper = split_indices(np.arange(n, dtype=float), gamma)
    assert len(lower) == expected and len(upper) == n - expected


def test_split_requires_observations():
    with pytest.raises(ValueError):
        split_observations([], 0.1)
    with pytest.raises(ValueError):
        split_indices(np.arange(3.0), 0.0)


def test_split_observations_objects():
    obs = [Observation({"x": i}, [float(v)], i) for i, v in enumerate([5, 3, 9, 1, 7])]
    dl, dg = split_observations(obs, 0.4)
    assert [o.config["x"] for o in dl] == [3, 1]
    assert len(dg) == 3


@given(arrays(float, st.tuples(st.integers(1, 40), st.integers(1, 3)),
              elements=st.integers(0, 5).map(float)),
       st.floats(0.01, 1.0))
@settings(max_examples=80, deadline=None)
def test_split_properties(f, gamma):
    lower, upper = split_indices(f, gamma)
    n = len(f)
    assert len(lower) == math.ceil(round(gamma * n, 9))
    assert sorted([*lower, *upper]) == list(range(n))
    # every member of the top group precedes every member of the rest
    position = np.empty(n, dtype=int)
    position[rank_order(f)] = np.arange(n)
    if len(upper):
        assert position[lower].max() < position[upper].min()
    ranks = nondomination_rank(f)
    if len(upper):
        assert ranks[lower].max() <= ranks[upper].min()


def test_single_objective_order_is_value_order():
    f = np.array([3.0, 1.0, 2.0, 1.0])
    np.testing.assert_array_equal(rank_order(f), [1, 3, 2, 0])
    np.testing.assert_array_equal(rank_order(f[:, None]), np.argsort(f, kind="stable"))


def test_crowding_breaks_ties_inside_front():
    # all nondominated; boundary points first, then the more isolated interior point
    f = np.array([[0.0, 10.0], [1.0, 9.0], [5.0, 5.0], [10.0, 0.0]])
    order = rank_order(f)
    assert set(order[:2]) == {0, 3}
    assert order[2] == 2


def test_hv_corner_and_box():
    assert normalized_hv([[0.0, 0.0]], [0, 0], [1, 1]) == 1.0
    assert normalized_hv([[0.5, 0.5]], [0, 0], [1, 1]) == 0.25


def test_hv_single_objective():
    assert normalized_hv([[3.0], [1.0]], [0.0], [4.0]) == 0.75


def test_hv_errors():
    with pytest.raises(UnsupportedDimensionError):
        normalized_hv([[0, 0, 0]], [0, 0, 0], [1, 1, 1])
    with pytest.raises(ValueError):
        normalized_hv([[0, 0]], [0, 1], [1, 1])


def test_hv_matches_grid_oracle():
    rng = np.random.default_rng(5)
    for _ in range(5):
        pts = rng.random((5, 2))
        assert abs(normalized_hv(pts, [0, 0], [1, 1]) - grid_hv(pts, [0, 0], [1, 1])) < 1e-2


@given(arrays(float, st.tuples(st.integers(1, 15), st.just(2)), elements=st.floats(-0.5, 1.5)),
       st.tuples(st.floats(-0.5, 1.5), st.floats(-0.5, 1.5)))
@settings(max_examples=100, deadline=None)
def test_hv_monotone_and_bounded(pts, extra):
    before = normalized_hv(pts, [0, 0], [1, 1])
    after = normalized_hv(np.vstack([pts, extra]), [0, 0], [1, 1])
    assert 0.0 <= before <= after <= 1.0


def test_attainment_single_run_is_its_front():
    run = [[0.0, 3.0], [1.0, 1.0], [2.0, 2.0], [3.0, 0.0]]
    np.testing.assert_array_equal(attainment_surface_50([run]), [[0, 3], [1, 1], [3, 0]])


def test_attainment_identical_runs():
    run = [[0.0, 2.0], [2.0, 0.0]]
    np.testing.assert_array_equal(attainment_surface_50([run, run]), run)


def test_attainment_two_disjoint_runs_meet_at_join():
    np.testing.assert_array_equal(attainment_surface_50([[[0, 1]], [[1, 0]]]), [[1, 1]])


def test_attainment_requires_two_objectives():
    with pytest.raises(UnsupportedDimensionError):
        attainment_surface_50([[[0, 1, 2]]])
