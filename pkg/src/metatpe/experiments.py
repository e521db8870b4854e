"""Method runners that turn an objective into a stream of per-trial records."""
from __future__ import annotations

import json
import math
import re
import time
from dataclasses import dataclass
from typing import Any, Callable, Iterator, Optional, Sequence, Union

import numpy as np

from .benchmarks import EllipsoidTask, TabularBenchmark, load_tabular, make_metadata
from .optimizer import MOTPE, MetaLearnTPE, OptimizerConfig, TaskDataset, make_streams
from .ranking import normalized_hv
from .space import Config, Observation, SearchSpace, sample_uniform

METHODS = ("tpe", "motpe", "metalearn-tpe", "random", "warmstart-only")
WARMSTART_FRACTION = 0.1

Objective = Union[EllipsoidTask, TabularBenchmark]


class UnknownBenchmarkError(ValueError):
    pass


@dataclass(frozen=True)
class RunRecord:
    trial_index: int
    config: dict
    objectives: list
    hv: float
    elapsed: float

    def to_json(self) -> str:
        return json.dumps({"trial_index": self.trial_index, "config": self.config,
                           "objectives": self.objectives, "hv": self.hv,
                           "elapsed": self.elapsed}, default=_plain)


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"cannot serialize {type(value).__name__}")


_ELLIPSOID = re.compile(r"^ellipsoid(?::(?P<c>[-+0-9.eE]+))?(?::(?P<dim>\d+))?$")


def resolve_benchmark(source: str) -> Objective:
    """A builtin name (``ellipsoid[:c[:D]]``) or the path of a benchmark file."""
    m = _ELLIPSOID.match(source)
    if m:
        try:
            return EllipsoidTask(float(m["c"] or 0.0), int(m["dim"] or 4))
        except ValueError as exc:
            raise UnknownBenchmarkError(f"{source}: {exc}") from None
    if source.startswith("ellipsoid"):
        raise UnknownBenchmarkError(f"malformed builtin {source!r}; expected ellipsoid[:c[:D]]")
    try:
        return load_tabular(source)
    except FileNotFoundError:
        raise UnknownBenchmarkError(f"no builtin or file named {source!r}") from None


def objective_bounds(obj: Objective) -> tuple[np.ndarray, np.ndarray]:
    return np.asarray(obj.f_min, dtype=float), np.asarray(obj.f_max, dtype=float)


def to_native(obj: Objective, internal) -> np.ndarray:
    if isinstance(obj, TabularBenchmark):
        return obj.to_native(internal)
    return np.asarray(internal, dtype=float)


def meta_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index + 1]).generate_state(1)[0])


def build_metadata(sources: Sequence[Objective], n_per_task: int, seed: int,
                   space: SearchSpace) -> list[list[Observation]]:
    out = []
    for i, src in enumerate(sources):
        if src.space.names != space.names:
            raise ValueError(f"meta-task {i + 1} has parameters {src.space.names}, "
                             f"target has {space.names}")
        n = min(n_per_task, len(src)) if isinstance(src, TabularBenchmark) else n_per_task
        out.append(make_metadata(src, n, meta_seed(seed, i)))
    return out


def _warmstart_only(space: SearchSpace, meta: Sequence[Sequence[Observation]],
                    config: OptimizerConfig) -> Iterator[Config]:
    if not meta:
        raise ValueError("warmstart-only needs at least one meta-task")
    streams = make_streams(config.seed)
    pool = []
    for obs in meta:
        task = TaskDataset(space, obs, gamma=config.gamma)
        pool.extend(dict(o.config) for o in task.best(math.ceil(WARMSTART_FRACTION * len(obs))))
    for j in streams.init.permutation(len(pool)):
        yield pool[j]
    while True:
        yield sample_uniform(space, streams.init)


def _random(space: SearchSpace, config: OptimizerConfig) -> Iterator[Config]:
    rng = make_streams(config.seed).init
    while True:
        yield sample_uniform(space, rng)


def make_optimizer(method: str, space: SearchSpace, meta: Sequence[Sequence[Observation]],
                   config: OptimizerConfig):
    """Return ``(ask, tell)`` callables for ``method``."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if method in ("random", "warmstart-only"):
        gen = _random(space, config) if method == "random" else _warmstart_only(space, meta, config)
        return (lambda: next(gen)), (lambda c, y: None)
    if method == "motpe":
        opt = MOTPE(space, config)
    else:
        opt = MetaLearnTPE(space, meta if method == "metalearn-tpe" else (), config)
    return opt.ask, opt.tell


def run_method(method: str, objective: Objective, budget: int,
               config: OptimizerConfig = OptimizerConfig(),
               meta: Sequence[Sequence[Observation]] = (),
               on_record: Optional[Callable[[RunRecord], Any]] = None) -> list[RunRecord]:
    """Evaluate ``budget`` configurations, recording the running normalized HV."""
    if budget < config.n_init:
        raise ValueError(f"budget {budget} is smaller than n_init {config.n_init}")
    ask, tell = make_optimizer(method, objective.space, meta, config)
    f_min, f_max = objective_bounds(objective)
    seen: list[np.ndarray] = []
    records = []
    start = time.perf_counter()
    for t in range(budget):
        cfg = ask()
        y = np.asarray(objective(cfg), dtype=float).reshape(-1)
        tell(cfg, y)
        seen.append(y)
        rec = RunRecord(t, dict(cfg), to_native(objective, y).tolist(),
                        normalized_hv(np.array(seen), f_min, f_max),
                        time.perf_counter() - start)
        records.append(rec)
        if on_record is not None:
            on_record(rec)
    return records


def read_records(path: str) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        rows = [json.loads(line) for line in fh if line.strip()]
    for i, row in enumerate(rows):
        missing = {"trial_index", "config", "objectives"} - set(row)
        if missing:
            raise ValueError(f"{path}:{i + 1}: missing fields {sorted(missing)}")
    return rows
