"""Objective providers: the shifted ellipsoid and lookup tables read from benchmark files.

Benchmark file layout (one JSON document)::

    {
      "name": "...",
      "space": [{"name": ..., "kind": "continuous" | "ordinal" | "categorical",
                 "lo"/"hi" | "levels" | "categories": ..., "log_scale": false}, ...],
      "objectives": [{"name": ..., "direction": "minimize" | "maximize",
                      "worst": <native value>, "best": <optional native value>}, ...],
      "records": [{"config": {...}, "objectives": [...], "complete": true}, ...]
                 | {"csv": "<sidecar path relative to this file>"}
    }

A CSV sidecar has a header row with every parameter name, every objective
name and optionally ``complete``; empty objective cells mean "missing".
Missing objectives of records marked incomplete are padded with the declared
worst value.  Internally every objective is minimized: maximized objectives
are negated at lookup.
"""
from __future__ import annotations

import csv
import json
import math
import os
import re
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence, Union

import numpy as np

from .space import (Categorical, Config, Continuous, DomainError, Observation, Ordinal,
                    SearchSpace, sample_uniform)


class BenchmarkParseError(ValueError):
    def __init__(self, message: str, lineno: Optional[int] = None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno is not None else message)


class BenchmarkValidationError(ValueError):
    pass


class MissingRecordError(KeyError):
    pass


# ---------------------------------------------------------------------------
# ellipsoid


@dataclass(frozen=True)
class EllipsoidTask:
    """``f(x | c) = sum_d 5**(d-1) * (x_d - c)**2`` on ``[-5, 5]^D``."""

    c: float = 0.0
    dim: int = 4
    bound: float = 5.0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dimension must be at least 1")

    @property
    def space(self) -> SearchSpace:
        return SearchSpace(tuple(Continuous(f"x{d}", -self.bound, self.bound)
                                 for d in range(1, self.dim + 1)))

    @property
    def weights(self) -> np.ndarray:
        return 5.0 ** np.arange(self.dim)

    def evaluate(self, x) -> float:
        if isinstance(x, Mapping):
            x = [x[f"x{d}"] for d in range(1, self.dim + 1)]
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DomainError(f"expected {self.dim} coordinates, got shape {x.shape}")
        if np.any(np.abs(x) > self.bound):
            raise DomainError(f"{x} outside [-{self.bound}, {self.bound}]^{self.dim}")
        return float(np.sum(self.weights * (x - self.c) ** 2))

    def __call__(self, config) -> np.ndarray:
        return np.array([self.evaluate(config)])

    @property
    def f_min(self) -> np.ndarray:
        return np.zeros(1)

    @property
    def f_max(self) -> np.ndarray:
        return np.array([np.sum(self.weights) * (self.bound + abs(self.c)) ** 2])


def ellipsoid_eval(task: EllipsoidTask, config) -> float:
    return task.evaluate(config)


# ---------------------------------------------------------------------------
# tabular benchmarks


def hpolib_space() -> SearchSpace:
    units = tuple(2.0**k for k in range(4, 10))
    return SearchSpace((
        Ordinal("n_units_1", units, log_scale=True),
        Ordinal("n_units_2", units, log_scale=True),
        Ordinal("dropout_1", (0.0, 0.3, 0.6)),
        Ordinal("dropout_2", (0.0, 0.3, 0.6)),
        Categorical("activation_fn_1", ("relu", "tanh")),
        Categorical("activation_fn_2", ("relu", "tanh")),
        Ordinal("batch_size", tuple(2.0**k for k in range(3, 7)), log_scale=True),
        Categorical("lr_schedule", ("cosine", "const")),
        Ordinal("init_lr", (5e-4, 1e-3, 5e-3, 1e-2, 5e-2, 1e-1), log_scale=True),
    ))


def nmt_space() -> SearchSpace:
    return SearchSpace((
        Ordinal("bpe", tuple(2.0**k for k in range(6)), log_scale=True),
        Ordinal("n_layers", (1, 2, 4)),
        Ordinal("n_embed", (256, 512, 1024), log_scale=True),
        Ordinal("n_hidden", (1024, 2048), log_scale=True),
        Ordinal("n_heads", (8, 16)),
        Ordinal("lr", (3, 6, 10)),
    ))


@dataclass
class TabularBenchmark:
    name: str
    space: SearchSpace
    objective_names: list[str]
    directions: list[str]
    worst: np.ndarray  # native units
    best: Optional[np.ndarray] = None  # native units, optional
    records: dict = field(default_factory=dict)  # key -> native objective vector
    complete: dict = field(default_factory=dict)  # key -> bool
    configs: dict = field(default_factory=dict)  # key -> config

    @property
    def n_objectives(self) -> int:
        return len(self.objective_names)

    @property
    def signs(self) -> np.ndarray:
        return np.array([-1.0 if d == "maximize" else 1.0 for d in self.directions])

    def to_internal(self, native) -> np.ndarray:
        return self.signs * np.asarray(native, dtype=float)

    def to_native(self, internal) -> np.ndarray:
        return self.signs * np.asarray(internal, dtype=float)

    def lookup(self, config: Mapping[str, Any]) -> np.ndarray:
        """Objective vector of ``config`` in minimization form."""
        try:
            key = self.space.key(config)
            return self.to_internal(self.records[key])
        except (KeyError, TypeError, ValueError):
            raise MissingRecordError(f"no record for config {dict(config)}") from None

    def __call__(self, config: Mapping[str, Any]) -> np.ndarray:
        return self.lookup(config)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def f_min(self) -> np.ndarray:
        """Best value per objective in minimization form."""
        if self.best is not None:
            return self.to_internal(self.best)
        return np.min([self.to_internal(v) for v in self.records.values()], axis=0)

    @property
    def f_max(self) -> np.ndarray:
        return self.to_internal(self.worst)

    def observations(self) -> list[Observation]:
        return [Observation(dict(self.configs[k]), self.to_internal(v), i)
                for i, (k, v) in enumerate(self.records.items())]


def lookup(bench: TabularBenchmark, config: Mapping[str, Any]) -> np.ndarray:
    return bench.lookup(config)


def _record_lines(text: str) -> list[int]:
    """Line number of every ``"config"`` key, i.e. of each record in order."""
    return [text.count("\n", 0, m.start()) + 1 for m in re.finditer(r'"config"\s*:', text)]


def _parse_objectives(values: Sequence[Any], complete: bool, worst: np.ndarray,
                      where: str) -> np.ndarray:
    m = len(worst)
    values = list(values)
    if len(values) > m:
        raise ValueError(f"{where}: {len(values)} objective values, expected {m}")
    values += [None] * (m - len(values))
    missing = [v is None or (isinstance(v, float) and math.isnan(v)) for v in values]
    if any(missing) and complete:
        raise ValueError(f"{where}: missing objective in a record marked complete")
    return np.array([w if miss else float(v) for v, w, miss in zip(values, worst, missing)])


def _parse_header(doc: Mapping[str, Any]) -> tuple[SearchSpace, list[str], list[str],
                                                      np.ndarray, Optional[np.ndarray]]:
    space = SearchSpace.from_json(doc["space"])
    objectives = doc["objectives"]
    if not objectives:
        raise ValueError("at least one objective is required")
    names = [o["name"] for o in objectives]
    directions = [o.get("direction", "minimize") for o in objectives]
    if any(d not in ("minimize", "maximize") for d in directions):
        raise ValueError(f"directions must be minimize/maximize, got {directions}")
    worst = np.array([float(o["worst"]) for o in objectives])
    best = None
    if all("best" in o for o in objectives):
        best = np.array([float(o["best"]) for o in objectives])
    return space, names, directions, worst, best


def _coerce(space: SearchSpace, raw: Mapping[str, str]) -> Config:
    config = {}
    for p in space.params:
        value = raw[p.name]
        if isinstance(p, Categorical):
            # CSV cells are strings; match labels by their string form
            if value not in p.categories:
                matches = [c for c in p.categories if str(c) == value]
                value = matches[0] if matches else value
        else:
            value = float(value)
        config[p.name] = value
    return config


def _add_record(bench: TabularBenchmark, config: Mapping[str, Any], values, complete: bool,
                where: str) -> None:
    try:
        key = bench.space.key(config)
        bench.space.to_unit(config)
    except (DomainError, KeyError, TypeError, ValueError) as exc:
        raise BenchmarkValidationError(f"{where}: {exc}") from None
    if key in bench.records:
        raise BenchmarkValidationError(f"{where}: duplicate config {dict(config)}")
    bench.records[key] = values
    bench.complete[key] = complete
    bench.configs[key] = dict(config)


def load_tabular(path: Union[str, os.PathLike]) -> TabularBenchmark:
    """Parse a benchmark file, validate it against its space and pad incomplete records."""
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BenchmarkParseError(exc.msg, exc.lineno) from None
    try:
        space, names, directions, worst, best = _parse_header(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise BenchmarkParseError(f"invalid header: {exc}", 1) from None
    bench = TabularBenchmark(doc.get("name", os.path.basename(path)), space, names, directions,
                             worst, best)
    records = doc.get("records", [])
    if isinstance(records, Mapping) and "csv" in records:
        sidecar = os.path.join(os.path.dirname(path), records["csv"])
        _load_csv(bench, sidecar)
    else:
        lines = _record_lines(text)
        for i, rec in enumerate(records):
            lineno = lines[i] if i < len(lines) else None
            try:
                complete = bool(rec.get("complete", True))
                config = rec["config"]
                values = _parse_objectives(rec["objectives"], complete, worst, f"record {i}")
            except (KeyError, TypeError, AttributeError, ValueError) as exc:
                raise BenchmarkParseError(f"record {i}: {exc}", lineno) from None
            _add_record(bench, config, values, complete, f"line {lineno}")
    if len(bench.records) > space.cardinality:
        raise BenchmarkValidationError(
            f"{len(bench.records)} records exceed the space's {space.cardinality} configurations")
    return bench


def _load_csv(bench: TabularBenchmark, path: str) -> None:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = set(bench.space.names) | set(bench.objective_names)
        missing = need - set(reader.fieldnames or ())
        if missing:
            raise BenchmarkParseError(f"{path}: missing columns {sorted(missing)}", 1)
        for row in reader:
            lineno = reader.line_num
            try:
                complete = row.get("complete", "true").strip().lower() in ("1", "true", "yes")
                values = [None if row[n] == "" else float(row[n]) for n in bench.objective_names]
                values = _parse_objectives(values, complete, bench.worst, f"{path}")
                config = _coerce(bench.space, row)
            except (KeyError, ValueError) as exc:
                raise BenchmarkParseError(f"{path}: {exc}", lineno) from None
            _add_record(bench, config, values, complete, f"{path} line {lineno}")


def _objective_cells(bench: TabularBenchmark, key, values) -> list:
    # padded entries of incomplete records are written back as missing
    if bench.complete[key]:
        return [float(v) for v in values]
    return [None if v == w else float(v) for v, w in zip(values, bench.worst)]


def write_tabular(bench: TabularBenchmark, path: Union[str, os.PathLike],
                  csv_sidecar: bool = False) -> None:
    path = os.fspath(path)
    objectives = []
    for i, name in enumerate(bench.objective_names):
        entry = {"name": name, "direction": bench.directions[i], "worst": float(bench.worst[i])}
        if bench.best is not None:
            entry["best"] = float(bench.best[i])
        objectives.append(entry)
    head = {"name": bench.name, "space": bench.space.to_json(), "objectives": objectives}
    if csv_sidecar:
        sidecar = os.path.splitext(path)[0] + ".csv"
        with open(sidecar, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(bench.space.names + bench.objective_names + ["complete"])
            for key, values in bench.records.items():
                config = bench.configs[key]
                writer.writerow([repr(float(config[n])) if not bench.space[n].is_categorical
                                 else config[n] for n in bench.space.names]
                                + ["" if v is None else repr(v)
                                   for v in _objective_cells(bench, key, values)]
                                + ["true" if bench.complete[key] else "false"])
        head["records"] = {"csv": os.path.basename(sidecar)}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(head, fh, indent=1)
            fh.write("\n")
        return
    body = json.dumps(head, indent=1)[:-2]  # reopen the top-level object
    lines = [
        json.dumps({"config": bench.configs[k], "objectives": _objective_cells(bench, k, vals),
                    "complete": bench.complete[k]})
        for k, vals in bench.records.items()
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(body + ',\n "records": [\n  ' + ",\n  ".join(lines) + "\n ]\n}\n")


def make_metadata(source, n_per_task: int, seed: int) -> list[Observation]:
    """Random observations of a task: without replacement for tables, i.i.d. otherwise."""
    if n_per_task < 1:
        raise ValueError("n_per_task must be positive")
    rng = np.random.default_rng(seed)
    if isinstance(source, TabularBenchmark):
        if n_per_task > len(source):
            raise ValueError(f"cannot draw {n_per_task} distinct records from {len(source)}")
        keys = list(source.records)
        picks = rng.choice(len(keys), size=n_per_task, replace=False)
        return [Observation(dict(source.configs[keys[j]]), source.to_internal(source.records[keys[j]]), i)
                for i, j in enumerate(picks)]
    out = []
    for i in range(n_per_task):
        config = sample_uniform(source.space, rng)
        out.append(Observation(config, source(config), i))
    return out


def synthetic_nmt_table(optimum: Sequence[float], name: str = "synthetic-nmt",
                        n_incomplete: int = 12, seed: int = 0) -> TabularBenchmark:
    """Deterministic NMT-shaped table with BLEU-like and speed-like objectives (both maximized).

    ``optimum`` is a unit-space point (length 6) where the quality score peaks;
    distinct optima give tasks of controlled similarity.
    """
    space = nmt_space()
    rng = np.random.default_rng(seed)
    optimum = np.asarray(optimum, dtype=float)
    grids = [np.linspace(0.0, 1.0, p.cardinality) for p in space.params]
    mesh = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, space.dim)
    scale = np.array([3.0, 2.0, 1.5, 1.0, 0.5, 2.5])
    bleu = 35.0 - 20.0 * np.sum(scale * (mesh - optimum) ** 2, axis=1) / scale.sum()
    bleu += rng.normal(0.0, 0.3, size=len(mesh))
    size = mesh[:, 1] + mesh[:, 2] + 0.5 * mesh[:, 3] + 0.25 * mesh[:, 4]
    speed = 4000.0 / (1.0 + 1.5 * size) + rng.normal(0.0, 20.0, size=len(mesh))
    bleu = np.round(np.clip(bleu, 0.5, None), 4)
    speed = np.round(np.clip(speed, 50.0, None), 2)
    bench = TabularBenchmark(name, space, ["bleu", "decoding_speed"], ["maximize", "maximize"],
                             worst=np.array([0.0, 0.0]))
    failed = set(rng.choice(len(mesh), size=n_incomplete, replace=False).tolist())
    for i, u in enumerate(mesh):
        config = space.from_unit(u)
        vals = np.array([bleu[i], speed[i]])
        if i in failed:
            vals = bench.worst.copy()
        _add_record(bench, config, vals, i not in failed, f"row {i}")
    return bench
