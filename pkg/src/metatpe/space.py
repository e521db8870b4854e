"""Search-space definitions and unit-cube scaling.

Configurations live in two representations:

* a *config* is a ``dict`` mapping parameter name to a native value
  (float for continuous parameters, one of the declared levels for ordinal
  parameters, one of the declared labels for categorical parameters);
* a *unit config* is a float vector of length ``D``.  Numerical coordinates
  lie in ``[0, 1]``; categorical coordinates hold the category index
  ``0 <= k < K`` stored as a float.  Batches are ``(n, D)`` arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence, Union

import numpy as np


class DomainError(ValueError):
    """A value or unit coordinate lies outside its parameter domain."""


@dataclass(frozen=True)
class Continuous:
    name: str
    lo: float
    hi: float
    log_scale: bool = False

    kind = "continuous"
    is_categorical = False

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"{self.name}: need lo < hi, got [{self.lo}, {self.hi}]")
        if self.log_scale and self.lo <= 0:
            raise ValueError(f"{self.name}: log scale requires lo > 0")

    @property
    def cardinality(self) -> float:
        return math.inf

    def _bounds(self) -> tuple[float, float]:
        if self.log_scale:
            return math.log(self.lo), math.log(self.hi)
        return self.lo, self.hi

    def to_unit(self, value: Any) -> float:
        x = float(value)
        if not self.lo <= x <= self.hi:
            raise DomainError(f"{self.name}={value!r} outside [{self.lo}, {self.hi}]")
        lo, hi = self._bounds()
        if self.log_scale:
            x = math.log(x)
        return min(max((x - lo) / (hi - lo), 0.0), 1.0)

    def from_unit(self, u: float) -> float:
        _check_unit(self.name, u)
        lo, hi = self._bounds()
        x = lo + float(u) * (hi - lo)
        if self.log_scale:
            x = math.exp(x)
        # exp/log round trips can leave the box by one ulp
        return min(max(x, self.lo), self.hi)

    def snap(self, u: np.ndarray) -> np.ndarray:
        return np.clip(u, 0.0, 1.0)

    def sample_unit(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.random(size)

    def to_json(self) -> dict:
        return {"name": self.name, "kind": self.kind, "lo": self.lo, "hi": self.hi,
                "log_scale": self.log_scale}


@dataclass(frozen=True)
class Ordinal:
    """Finite, ordered grid of numeric levels mapped by index onto ``[0, 1]``."""

    name: str
    levels: tuple[float, ...]
    log_scale: bool = False

    kind = "ordinal"
    is_categorical = False

    def __post_init__(self) -> None:
        levels = tuple(float(v) for v in self.levels)
        object.__setattr__(self, "levels", levels)
        if len(levels) < 2:
            raise ValueError(f"{self.name}: need at least two levels")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError(f"{self.name}: levels must be strictly increasing")
        if self.log_scale and levels[0] <= 0:
            raise ValueError(f"{self.name}: log scale requires positive levels")

    @property
    def cardinality(self) -> int:
        return len(self.levels)

    def index_of(self, value: Any) -> int:
        try:
            return self.levels.index(float(value))
        except (ValueError, TypeError):
            raise DomainError(f"{self.name}={value!r} is not one of {self.levels}") from None

    def to_unit(self, value: Any) -> float:
        return self.index_of(value) / (len(self.levels) - 1)

    def from_unit(self, u: float) -> float:
        _check_unit(self.name, u)
        return self.levels[self._round(float(u))]

    def _round(self, u):
        # round half up
        return np.floor(np.asarray(u) * (len(self.levels) - 1) + 0.5).astype(int)

    def snap(self, u: np.ndarray) -> np.ndarray:
        return self._round(np.clip(u, 0.0, 1.0)) / (len(self.levels) - 1)

    def sample_unit(self, rng: np.random.Generator, size: int) -> np.ndarray:
        # each level owns an equal-width cell of the relaxed domain
        return rng.integers(len(self.levels), size=size) / (len(self.levels) - 1)

    def to_json(self) -> dict:
        return {"name": self.name, "kind": self.kind, "levels": list(self.levels),
                "log_scale": self.log_scale}


@dataclass(frozen=True)
class Categorical:
    name: str
    categories: tuple[Any, ...]

    kind = "categorical"
    is_categorical = True
    log_scale = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "categories", tuple(self.categories))
        if len(self.categories) < 2:
            raise ValueError(f"{self.name}: need at least two categories")
        if len(set(self.categories)) != len(self.categories):
            raise ValueError(f"{self.name}: category labels must be unique")

    @property
    def n_categories(self) -> int:
        return len(self.categories)

    @property
    def cardinality(self) -> int:
        return len(self.categories)

    def to_unit(self, value: Any) -> float:
        try:
            return float(self.categories.index(value))
        except ValueError:
            raise DomainError(f"{self.name}={value!r} is not one of {self.categories}") from None

    def from_unit(self, u: float) -> Any:
        k = float(u)
        if not (k == int(k) and 0 <= k < len(self.categories)):
            raise DomainError(f"{self.name}: category index {u!r} outside [0, {len(self.categories)})")
        return self.categories[int(k)]

    def snap(self, u: np.ndarray) -> np.ndarray:
        return np.clip(np.round(u), 0, len(self.categories) - 1)

    def sample_unit(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.integers(len(self.categories), size=size).astype(float)

    def to_json(self) -> dict:
        return {"name": self.name, "kind": self.kind, "categories": list(self.categories)}


ParamDomain = Union[Continuous, Ordinal, Categorical]
Config = dict


def _check_unit(name: str, u: float) -> None:
    if not 0.0 <= float(u) <= 1.0:
        raise DomainError(f"{name}: unit coordinate {u!r} outside [0, 1]")


@dataclass(frozen=True)
class SearchSpace:
    params: tuple[ParamDomain, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        params = tuple(self.params)
        object.__setattr__(self, "params", params)
        if not params:
            raise ValueError("a search space needs at least one parameter")
        names = [p.name for p in params]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate parameter names in {names}")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    @property
    def dim(self) -> int:
        return len(self.params)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    @property
    def categorical_mask(self) -> np.ndarray:
        return np.array([p.is_categorical for p in self.params])

    @property
    def cardinality(self) -> float:
        return math.prod(p.cardinality for p in self.params)

    def __getitem__(self, name: str) -> ParamDomain:
        return self.params[self._index[name]]

    def to_unit(self, config: Mapping[str, Any]) -> np.ndarray:
        if set(config) != set(self._index):
            raise DomainError(f"config keys {sorted(config)} do not match {sorted(self._index)}")
        return np.array([p.to_unit(config[p.name]) for p in self.params])

    def from_unit(self, u: Sequence[float]) -> Config:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.dim,):
            raise DomainError(f"unit config must have shape ({self.dim},), got {u.shape}")
        return {p.name: p.from_unit(v) for p, v in zip(self.params, u)}

    def to_unit_array(self, configs: Sequence[Mapping[str, Any]]) -> np.ndarray:
        return np.array([self.to_unit(c) for c in configs], dtype=float).reshape(-1, self.dim)

    def snap(self, units: np.ndarray) -> np.ndarray:
        """Project unit coordinates onto the nearest representable configuration."""
        units = np.atleast_2d(np.asarray(units, dtype=float))
        return np.column_stack([p.snap(units[:, d]) for d, p in enumerate(self.params)])

    def sample_unit(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.column_stack([p.sample_unit(rng, size) for p in self.params])

    def contains(self, config: Mapping[str, Any]) -> bool:
        try:
            self.to_unit(config)
        except DomainError:
            return False
        return True

    def key(self, config: Mapping[str, Any]) -> tuple:
        """Hashable identity of a config (native values in parameter order)."""
        return tuple(
            float(config[p.name]) if not p.is_categorical else config[p.name] for p in self.params
        )

    def to_json(self) -> list[dict]:
        return [p.to_json() for p in self.params]

    @classmethod
    def from_json(cls, entries: Sequence[Mapping[str, Any]]) -> "SearchSpace":
        return cls(tuple(param_from_json(e) for e in entries))


def param_from_json(entry: Mapping[str, Any]) -> ParamDomain:
    kind = entry.get("kind")
    name = entry["name"]
    if kind == "continuous":
        return Continuous(name, float(entry["lo"]), float(entry["hi"]),
                          bool(entry.get("log_scale", False)))
    if kind == "ordinal":
        return Ordinal(name, tuple(entry["levels"]), bool(entry.get("log_scale", False)))
    if kind == "categorical":
        return Categorical(name, tuple(entry["categories"]))
    raise ValueError(f"unknown parameter kind {kind!r} for {name!r}")


def sample_uniform(space: SearchSpace, rng: np.random.Generator) -> Config:
    """Draw one configuration uniformly from ``space``."""
    return space.from_unit(space.sample_unit(rng, 1)[0])


@dataclass(frozen=True)
class Observation:
    config: Config
    objectives: np.ndarray
    trial_index: int = 0

    def __post_init__(self) -> None:
        obj = np.atleast_1d(np.asarray(self.objectives, dtype=float))
        if obj.ndim != 1 or obj.size == 0:
            raise ValueError("objectives must be a non-empty vector")
        object.__setattr__(self, "objectives", obj)
