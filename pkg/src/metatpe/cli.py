"""Command-line entry point: ``metatpe {run,similarity,hv,eaf}``.

Exit status is 0 on success, 1 when a run fails at runtime and 2 for usage
errors.  ``METATPE_LOG`` (error, info or debug) sets the log level on stderr.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import os
import sys
from typing import Optional, Sequence

import numpy as np

from .benchmarks import TabularBenchmark, make_metadata
from .experiments import (METHODS, UnknownBenchmarkError, build_metadata, meta_seed,
                          read_records, resolve_benchmark, run_method)
from .optimizer import OptimizerConfig, TaskDataset
from .ranking import UnsupportedDimensionError, attainment_surface_50, hv_curve
from .similarity import compute_task_kernel
from .space import Observation

logger = logging.getLogger("metatpe")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2
LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


class UsageError(Exception):
    pass


def _configure_logging() -> None:
    name = os.environ.get("METATPE_LOG", "error").strip().lower()
    if name not in LOG_LEVELS:
        raise UsageError(f"METATPE_LOG must be one of {', '.join(LOG_LEVELS)}, got {name!r}")
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logger.handlers[:] = [handler]
    logger.setLevel(LOG_LEVELS[name])
    logger.propagate = False


@contextlib.contextmanager
def _output(path: str):
    if path == "-":
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _benchmark(source: str):
    try:
        return resolve_benchmark(source)
    except UnknownBenchmarkError as exc:
        raise UsageError(str(exc)) from None


def _optimizer_config(args) -> OptimizerConfig:
    defaults = OptimizerConfig()
    values = {name: getattr(args, name, None) for name in
              ("gamma", "n_init", "n_candidates", "epsilon", "eta", "n_mc", "seed")}
    try:
        return OptimizerConfig(**{k: v if v is not None else getattr(defaults, k)
                                  for k, v in values.items()})
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _add_config_flags(p: argparse.ArgumentParser, search: bool = True) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--n-mc", type=int)
    if search:
        p.add_argument("--epsilon", type=float)
        p.add_argument("--n-candidates", type=int)
        p.add_argument("--n-init", type=int)


def cmd_run(args) -> int:
    target = _benchmark(args.benchmark)
    config = _optimizer_config(args)
    if args.budget < config.n_init:
        raise UsageError(f"--budget {args.budget} is smaller than n_init {config.n_init}")
    if args.method == "warmstart-only" and not args.meta:
        raise UsageError("warmstart-only needs at least one --meta source")
    try:
        meta = build_metadata([_benchmark(m) for m in args.meta], args.n_meta, args.seed,
                              target.space)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.method not in ("metalearn-tpe", "warmstart-only") and meta:
        logger.info("method %s ignores %d meta-task(s)", args.method, len(meta))
    with _output(args.out) as out:
        def emit(rec):
            out.write(rec.to_json() + "\n")
            out.flush()
            logger.info("trial %d hv=%.6f", rec.trial_index, rec.hv)

        run_method(args.method, target, args.budget, config, meta, on_record=emit)
    return EXIT_OK


def _observations(source: str, space_source: Optional[TabularBenchmark], n: int, seed: int):
    """Observations (minimization form) from a results file, a table or a builtin task."""
    if source.endswith(".jsonl"):
        rows = read_records(source)
        signs = space_source.signs if isinstance(space_source, TabularBenchmark) else 1.0
        return [Observation(r["config"], signs * np.asarray(r["objectives"], dtype=float), i)
                for i, r in enumerate(rows)]
    bench = _benchmark(source)
    if isinstance(bench, TabularBenchmark):
        return bench.observations()
    return make_metadata(bench, n, seed)


def cmd_similarity(args) -> int:
    jsonl = [s for s in (args.benchmark, *args.meta) if s.endswith(".jsonl")]
    reference = None
    if args.space is not None:
        reference = _benchmark(args.space)
    elif jsonl:
        candidates = [s for s in (args.benchmark, *args.meta) if not s.endswith(".jsonl")]
        if not candidates:
            raise UsageError("results files need --space to declare the search space")
        reference = _benchmark(candidates[0])
    sources = [args.benchmark, *args.meta]
    tasks = [_observations(s, reference, args.n_meta, meta_seed(args.seed, i - 1))
             for i, s in enumerate(sources)]
    spaces = [(_benchmark(s).space if not s.endswith(".jsonl") else reference.space)
              for s in sources]
    space = spaces[0]
    if any(s.names != space.names for s in spaces):
        raise UsageError("all tasks must share the same parameters")
    config = _optimizer_config(args)
    dl_sets = []
    for obs in tasks:
        if not obs:
            raise UsageError("every task needs at least one observation")
        ds = TaskDataset(space, obs, gamma=config.gamma)
        dl_sets.append(ds.units[ds.split()[0]])
    kernel = compute_task_kernel(dl_sets, space, config.gamma, config.eta, config.n_mc,
                                 np.random.default_rng(config.seed))
    report = {
        "similarities": [float(s) for s in kernel.similarities],
        "tv_distances": [float(d) for d in kernel.tv_distances],
        "kernel_row": [float(w) for w in kernel.target_row],
        "dims": [int(d) for d in kernel.dims],
        "dim_names": [space.names[d] for d in kernel.dims],
        "hpi": [] if kernel.hpi is None else [float(v) for v in kernel.hpi.averaged],
        "n_dl": [len(d) for d in dl_sets],
    }
    with _output(args.out) as out:
        json.dump(report, out, indent=1)
        out.write("\n")
    return EXIT_OK


def _signs_and_bounds(args, n_obj: int, need_bounds: bool):
    if args.benchmark is not None:
        bench = _benchmark(args.benchmark)
        signs = bench.signs if isinstance(bench, TabularBenchmark) else np.ones(n_obj)
        f_min, f_max = np.asarray(bench.f_min, float), np.asarray(bench.f_max, float)
    else:
        signs = np.ones(n_obj)
        for i in args.maximize or ():
            if not 0 <= i < n_obj:
                raise UsageError(f"--maximize index {i} out of range for {n_obj} objectives")
            signs[i] = -1.0
        if need_bounds and (args.f_min is None or args.f_max is None):
            raise UsageError("give --benchmark or both --f-min and --f-max")
        f_min = None if args.f_min is None else np.asarray(args.f_min, float)
        f_max = None if args.f_max is None else np.asarray(args.f_max, float)
    if need_bounds and (len(f_min) != n_obj or len(f_max) != n_obj):
        raise UsageError(f"bounds have {len(f_min)}/{len(f_max)} entries, runs have {n_obj}")
    return signs, f_min, f_max


def _load_runs(paths: Sequence[str]) -> list[np.ndarray]:
    runs = []
    for path in paths:
        try:
            rows = read_records(path)
        except FileNotFoundError:
            raise UsageError(f"no such results file: {path}") from None
        if not rows:
            raise UsageError(f"{path} holds no records")
        try:
            runs.append(np.array([r["objectives"] for r in rows], dtype=float))
        except ValueError:
            raise UsageError(f"{path}: objective vectors have mixed lengths") from None
    widths = {r.shape[1] for r in runs}
    if len(widths) != 1:
        raise UsageError(f"results files disagree on the number of objectives: {sorted(widths)}")
    return runs


def _write_table(out, header: Sequence[str], rows) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([[repr(float(v)) if not isinstance(v, (int, np.integer)) else int(v)
                       for v in row] for row in rows])


def cmd_hv(args) -> int:
    runs = _load_runs(args.runs)
    signs, f_min, f_max = _signs_and_bounds(args, runs[0].shape[1], need_bounds=True)
    curves = [hv_curve(r * signs, f_min, f_max) for r in runs]
    length = min(len(c) for c in curves)
    if any(len(c) != length for c in curves):
        logger.info("runs have different lengths; aggregating the first %d trials", length)
    stack = np.array([c[:length] for c in curves])
    mean = stack.mean(axis=0)
    stderr = (stack.std(axis=0, ddof=1) / np.sqrt(len(stack)) if len(stack) > 1
              else np.zeros(length))
    with _output(args.out) as out:
        if args.format == "csv":
            header = ["trial_index", *[f"run{i}" for i in range(len(stack))], "mean", "stderr"]
            _write_table(out, header, [[t, *stack[:, t], mean[t], stderr[t]]
                                       for t in range(length)])
        else:
            json.dump({"runs": [c.tolist() for c in curves], "mean": mean.tolist(),
                       "stderr": stderr.tolist()}, out)
            out.write("\n")
    return EXIT_OK


def cmd_eaf(args) -> int:
    runs = _load_runs(args.runs)
    signs, _, _ = _signs_and_bounds(args, runs[0].shape[1], need_bounds=False)
    try:
        surface = attainment_surface_50([r * signs for r in runs]) * signs
    except UnsupportedDimensionError as exc:
        raise UsageError(str(exc)) from None
    with _output(args.out) as out:
        if args.format == "csv":
            _write_table(out, [f"f{i + 1}" for i in range(surface.shape[1])], surface)
        else:
            json.dump({"points": surface.tolist(), "n_runs": len(runs)}, out)
            out.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metatpe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="optimize a benchmark and write JSON Lines records")
    run.add_argument("--benchmark", required=True,
                     help="benchmark file or builtin ellipsoid[:c[:D]]")
    run.add_argument("--method", choices=METHODS, default="metalearn-tpe")
    run.add_argument("--meta", action="append", default=[],
                     help="meta-task source (repeatable)")
    run.add_argument("--n-meta", type=int, default=100,
                     help="random observations drawn from each meta-task")
    run.add_argument("--budget", type=int, default=100)
    run.add_argument("--out", default="-")
    _add_config_flags(run)
    run.set_defaults(func=cmd_run)

    sim = sub.add_parser("similarity", help="task similarities and kernel row")
    sim.add_argument("--benchmark", required=True,
                     help="target task: benchmark file, builtin or results .jsonl")
    sim.add_argument("--meta", action="append", required=True)
    sim.add_argument("--space", help="benchmark whose space and directions interpret .jsonl files")
    sim.add_argument("--n-meta", type=int, default=100)
    sim.add_argument("--out", default="-")
    _add_config_flags(sim, search=False)
    sim.set_defaults(func=cmd_similarity)

    for name, func, help_text in (("hv", cmd_hv, "normalized hypervolume curves"),
                                  ("eaf", cmd_eaf, "50% empirical attainment surface")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("runs", nargs="+", help="results .jsonl files")
        p.add_argument("--benchmark", help="take directions and bounds from this benchmark")
        p.add_argument("--f-min", type=float, nargs="+",
                       help="best value per objective (minimization form)")
        p.add_argument("--f-max", type=float, nargs="+",
                       help="worst value per objective (minimization form)")
        p.add_argument("--maximize", type=int, nargs="*",
                       help="0-based indices of objectives stored as maximized")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", default="-")
        p.set_defaults(func=func)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        _configure_logging()
        return args.func(args)
    except UsageError as exc:
        print(f"metatpe: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - any failure inside a command is a runtime error
        logger.debug("command failed", exc_info=True)
        print(f"metatpe: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
