import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from metatpe.benchmarks import hpolib_space, nmt_space
from metatpe.space import (Categorical, Continuous, DomainError, Ordinal, SearchSpace,
                           sample_uniform)


UNITS = tuple(2.0**k for k in range(4, 10))


def test_continuous_midpoint():
    assert Continuous("x", 0, 10).to_unit(5) == 0.5


def test_ordinal_first_level_maps_to_zero():
    assert Ordinal("n_units_1", UNITS).to_unit(2**4) == 0.0


def test_categorical_index():
    assert Categorical("act", ("ReLU", "tanh")).to_unit("ReLU") == 0


def test_continuous_from_unit_linear():
    assert Continuous("x", 0, 10).from_unit(0.25) == 2.5


def test_ordinal_round_half_up():
    # 0.5 * 5 = 2.5 rounds up to index 3
    assert Ordinal("n", UNITS).from_unit(0.5) == UNITS[3]


def test_ordinal_endpoint():
    assert Ordinal("n", (1, 2, 4)).from_unit(1.0) == 4


@pytest.mark.parametrize("param, value", [
    (Continuous("x", 0, 1), 1.5),
    (Continuous("x", 1e-3, 1, log_scale=True), 0.0),
    (Ordinal("n", (1, 2, 4)), 3),
    (Categorical("c", ("a", "b")), "z"),
])
def test_to_unit_rejects_out_of_domain(param, value):
    with pytest.raises(DomainError):
        param.to_unit(value)


@pytest.mark.parametrize("u", [-0.1, 1.5])
def test_from_unit_rejects_outside_cube(u):
    with pytest.raises(DomainError):
        Continuous("x", 0, 1).from_unit(u)
    with pytest.raises(DomainError):
        Ordinal("n", (1, 2)).from_unit(u)


def test_categorical_from_unit_rejects_bad_index():
    with pytest.raises(DomainError):
        Categorical("c", ("a", "b")).from_unit(2)
    with pytest.raises(DomainError):
        Categorical("c", ("a", "b")).from_unit(0.5)


@pytest.mark.parametrize("bad", [
    lambda: Continuous("x", 1, 1),
    lambda: Continuous("x", 0, 1, log_scale=True),
    lambda: Ordinal("n", (1,)),
    lambda: Ordinal("n", (2, 1)),
    lambda: Categorical("c", ("a",)),
    lambda: Categorical("c", ("a", "a")),
    lambda: SearchSpace(()),
    lambda: SearchSpace((Continuous("x", 0, 1), Continuous("x", 0, 2))),
])
def test_invalid_domains(bad):
    with pytest.raises(ValueError):
        bad()


SPACE = SearchSpace((
    Continuous("lr", 1e-5, 1e-1, log_scale=True),
    Continuous("momentum", 0.0, 0.99),
    Ordinal("units", UNITS),
    Categorical("act", ("relu", "tanh", "elu")),
))


@st.composite
def configs(draw):
    return {
        "lr": draw(st.floats(1e-5, 1e-1)),
        "momentum": draw(st.floats(0.0, 0.99)),
        "units": draw(st.sampled_from(UNITS)),
        "act": draw(st.sampled_from(("relu", "tanh", "elu"))),
    }


@given(configs())
def test_round_trip(config):
    u = SPACE.to_unit(config)
    assert np.all((u[:3] >= 0) & (u[:3] <= 1))
    back = SPACE.from_unit(u)
    assert back["units"] == config["units"] and back["act"] == config["act"]
    assert math.isclose(back["lr"], config["lr"], rel_tol=1e-12)
    assert math.isclose(back["momentum"], config["momentum"], rel_tol=1e-12, abs_tol=1e-15)


@given(st.lists(st.floats(0, 1), min_size=3, max_size=3), st.integers(0, 2))
@settings(max_examples=50)
def test_snap_then_round_trip_is_stable(coords, k):
    u = np.array([*coords, k], dtype=float)
    snapped = SPACE.snap(u)[0]
    assert np.allclose(SPACE.to_unit(SPACE.from_unit(snapped)), snapped, atol=1e-12)


def test_sample_uniform_reproducible():
    a = [sample_uniform(SPACE, np.random.default_rng(7)) for _ in range(3)]
    b = [sample_uniform(SPACE, np.random.default_rng(7)) for _ in range(3)]
    assert a == b
    assert SPACE.contains(a[0])


def test_sample_categorical_frequencies():
    space = SearchSpace((Categorical("c", ("a", "b", "c", "d")),))
    draws = space.sample_unit(np.random.default_rng(0), 100_000)[:, 0]
    freq = np.bincount(draws.astype(int), minlength=4) / len(draws)
    assert np.all(np.abs(freq - 0.25) < 0.01)


def test_sample_uniform_chi_square():
    space = SearchSpace((Continuous("x", 0, 1),))
    rng = np.random.default_rng(1)
    xs = np.array([sample_uniform(space, rng)["x"] for _ in range(5000)])
    counts, _ = np.histogram(xs, bins=20, range=(0, 1))
    assert stats.chisquare(counts).pvalue > 0.01


def test_ordinal_samples_cover_levels_uniformly():
    space = SearchSpace((Ordinal("n", (1, 2, 4)),))
    draws = space.sample_unit(np.random.default_rng(3), 30_000)[:, 0]
    freq = np.array([np.mean(np.isclose(draws, v)) for v in (0.0, 0.5, 1.0)])
    assert np.all(np.abs(freq - 1 / 3) < 0.01)


def test_table_cardinalities():
    assert hpolib_space().dim == 9 and hpolib_space().cardinality == 62208
    assert nmt_space().dim == 6 and nmt_space().cardinality == 648


def test_json_round_trip():
    assert SearchSpace.from_json(SPACE.to_json()) == SPACE
