"""Meta-learning TPE: warm start, task-weighted density-ratio acquisition, epsilon-greedy."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .kde import KDE, BandwidthRule
from .ranking import rank_order, split_indices
from .similarity import TaskKernelMatrix, task_kernel_from_kdes
from .space import Config, Observation, SearchSpace, sample_uniform

logger = logging.getLogger(__name__)

DENSITY_FLOOR = 1e-12
_LOG_FLOOR = math.log(DENSITY_FLOOR)


class PhaseError(RuntimeError):
    """An operation was called in the wrong optimizer phase."""


@dataclass(frozen=True)
class OptimizerConfig:
    gamma: float = 0.1
    n_init: int = 5
    n_candidates: int = 100
    epsilon: float = 0.05
    eta: float = 2.5
    n_mc: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.n_candidates < 1 or self.n_init < 1:
            raise ValueError("n_candidates and n_init must be positive")
        if self.eta <= 1:
            raise ValueError("eta must exceed 1")
        if self.n_mc < 2 or self.n_mc % 2:
            raise ValueError("n_mc must be an even number >= 2")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


class Streams(NamedTuple):
    init: np.random.Generator
    candidates: np.random.Generator
    greedy: np.random.Generator
    similarity: np.random.Generator


def make_streams(seed: int) -> Streams:
    """Independent random streams for each decision the optimizer makes."""
    return Streams(*(np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(4)))


class TaskDataset:
    """Observations of one task together with its cached quantile split and KDEs."""

    def __init__(self, space: SearchSpace, observations: Sequence[Observation] = (),
                 gamma: float = 0.1, task_id: Any = None,
                 rule: BandwidthRule = BandwidthRule()):
        self.space = space
        self.gamma = gamma
        self.task_id = task_id
        self.rule = rule
        self.observations: list[Observation] = []
        self._units: list[np.ndarray] = []
        self._cache: dict = {}
        for obs in observations:
            self.append(obs)

    def __len__(self) -> int:
        return len(self.observations)

    def append(self, obs: Observation) -> None:
        if self.observations and obs.objectives.shape != self.observations[0].objectives.shape:
            raise ValueError(
                f"expected {self.observations[0].objectives.size} objectives, "
                f"got {obs.objectives.size}"
            )
        self._units.append(self.space.to_unit(obs.config))
        self.observations.append(obs)
        self._cache.clear()

    def add(self, config: Config, objectives) -> Observation:
        obs = Observation(dict(config), objectives, trial_index=len(self.observations))
        self.append(obs)
        return obs

    @property
    def units(self) -> np.ndarray:
        if "units" not in self._cache:
            units = np.array(self._units).reshape(-1, self.space.dim)
            units.setflags(write=False)
            self._cache["units"] = units
        return self._cache["units"]

    @property
    def objectives(self) -> np.ndarray:
        if "objectives" not in self._cache:
            self._cache["objectives"] = np.array([o.objectives for o in self.observations])
        return self._cache["objectives"]

    def split(self) -> tuple[np.ndarray, np.ndarray]:
        if "split" not in self._cache:
            self._cache["split"] = split_indices(self.objectives, self.gamma)
        return self._cache["split"]

    @property
    def dl(self) -> list[Observation]:
        return [self.observations[i] for i in self.split()[0]]

    @property
    def dg(self) -> list[Observation]:
        return [self.observations[i] for i in self.split()[1]]

    @property
    def kde_l(self) -> KDE:
        if "kde_l" not in self._cache:
            self._cache["kde_l"] = KDE(self.units[self.split()[0]], self.space, rule=self.rule)
        return self._cache["kde_l"]

    @property
    def kde_g(self) -> Optional[KDE]:
        """KDE of the remainder, or ``None`` when every observation is in the top group."""
        if "kde_g" not in self._cache:
            upper = self.split()[1]
            self._cache["kde_g"] = (
                KDE(self.units[upper], self.space, rule=self.rule) if len(upper) else None
            )
        return self._cache["kde_g"]

    def best(self, k: int) -> list[Observation]:
        order = rank_order(self.objectives)
        return [self.observations[i] for i in order[:k]]


def _log_mixture(weights: np.ndarray, log_pdfs: list[np.ndarray], n_points: int) -> np.ndarray:
    keep = [i for i, w in enumerate(weights) if w > 0]
    if not keep:
        return np.full(n_points, _LOG_FLOOR)
    stacked = np.vstack([np.log(weights[i]) + log_pdfs[i] for i in keep])
    return np.maximum(np.logaddexp.reduce(stacked, axis=0), _LOG_FLOOR)


def log_acquisition(u: np.ndarray, kernel_row: np.ndarray, tasks: Sequence[TaskDataset]) -> np.ndarray:
    """Log of the task-conditioned density ratio at each row of ``u``.

    ``tasks[0]`` is the target.  Each joint density is the mixture of the
    per-task KDEs weighted by ``N_m * k_t(t_1, t_m) / N_all`` and floored at
    ``DENSITY_FLOOR``.
    """
    u = np.atleast_2d(u)
    kernel_row = np.asarray(kernel_row, dtype=float)
    n_l = np.array([len(t.split()[0]) for t in tasks], dtype=float)
    n_g = np.array([len(t.split()[1]) for t in tasks], dtype=float)
    w_l = n_l * kernel_row / n_l.sum()
    log_l = [t.kde_l.log_pdf(u) if w > 0 else None for t, w in zip(tasks, w_l)]
    num = _log_mixture(w_l, log_l, len(u))
    if n_g.sum() == 0:
        # no observation outside the top group: treat g as the uniform density
        return num
    w_g = n_g * kernel_row / n_g.sum()
    log_g = [t.kde_g.log_pdf(u) if w > 0 else None for t, w in zip(tasks, w_g)]
    den = _log_mixture(w_g, log_g, len(u))
    return num - den


def acquisition(u: np.ndarray, kernel_row: np.ndarray, tasks: Sequence[TaskDataset]) -> np.ndarray:
    return np.exp(log_acquisition(u, kernel_row, tasks))


def warm_start_pool(meta: Sequence[TaskDataset], n_init: int) -> list[Config]:
    """Top ``ceil(n_init / (T - 1))`` configs of every meta-task (may repeat across tasks)."""
    if not meta:
        return []
    per_task = math.ceil(n_init / len(meta))
    pool = []
    for task in meta:
        if len(task) == 0:
            raise ValueError(f"meta-task {task.task_id!r} has no observations")
        pool.extend(dict(o.config) for o in task.best(per_task))
    return pool


class MetaLearnTPE:
    """Ask/tell optimizer for a target task given frozen meta-task archives.

    With no meta-tasks this is plain (MO-)TPE plus the epsilon-greedy branch.
    """

    def __init__(self, space: SearchSpace, meta: Sequence[Sequence[Observation]] = (),
                 config: OptimizerConfig = OptimizerConfig(),
                 rule: BandwidthRule = BandwidthRule(), naive_kernel: bool = False):
        self.space = space
        self.config = config
        self.rule = rule
        self.naive_kernel = naive_kernel
        self.target = TaskDataset(space, gamma=config.gamma, task_id="target", rule=rule)
        self.meta = [
            m if isinstance(m, TaskDataset)
            else TaskDataset(space, m, gamma=config.gamma, task_id=i + 1, rule=rule)
            for i, m in enumerate(meta)
        ]
        self.pool = warm_start_pool(self.meta, config.n_init)
        for m in self.meta:
            if m.gamma != config.gamma:
                raise ValueError("meta-tasks must be split with the target's gamma")
            m.kde_l, m.kde_g  # build once; meta archives never change
        self.streams = make_streams(config.seed)
        self.kernel: Optional[TaskKernelMatrix] = None
        self.kernel_history: list[np.ndarray] = []
        self.last_candidates: Optional[np.ndarray] = None

    @property
    def n_tasks(self) -> int:
        return 1 + len(self.meta)

    @property
    def phase(self) -> str:
        return "warm_start" if len(self.target) < self.config.n_init else "bo"

    def init_phase(self) -> Optional[Config]:
        """Next warm-start config, or ``None`` once the initial design is evaluated."""
        if self.phase != "warm_start":
            return None
        if self.pool:
            return self.pool.pop(int(self.streams.init.integers(len(self.pool))))
        return sample_uniform(self.space, self.streams.init)

    def candidates(self) -> np.ndarray:
        """``N_s`` snapped samples from each task's top-quantile KDE, target first."""
        tasks = [self.target, *self.meta]
        draws = [t.kde_l.sample(self.config.n_candidates, self.streams.candidates) for t in tasks]
        return self.space.snap(np.vstack(draws))

    def compute_kernel(self) -> TaskKernelMatrix:
        tasks = [self.target, *self.meta]
        if self.naive_kernel:
            t = len(tasks)
            kernel = TaskKernelMatrix(np.full((t, t), 1.0 / t), np.ones(t - 1))
        else:
            kernel = task_kernel_from_kdes([x.kde_l for x in tasks], self.config.gamma,
                                           self.config.eta, self.config.n_mc,
                                           self.streams.similarity)
        self.kernel = kernel
        self.kernel_history.append(kernel.target_row.copy())
        return kernel

    def suggest(self) -> Config:
        if self.phase != "bo":
            raise PhaseError("suggest() called before the warm-start phase finished")
        cands = self.candidates()
        self.last_candidates = cands
        kernel = self.compute_kernel()
        if self.streams.greedy.random() < self.config.epsilon:
            return sample_uniform(self.space, self.streams.greedy)
        scores = log_acquisition(cands, kernel.target_row, [self.target, *self.meta])
        return self.space.from_unit(cands[int(np.argmax(scores))])

    def ask(self) -> Config:
        config = self.init_phase()
        return config if config is not None else self.suggest()

    def tell(self, config: Mapping[str, Any], objectives) -> Observation:
        return self.target.add(config, objectives)

    def run(self, objective_fn: Callable[[Config], Any], budget: int) -> list[Observation]:
        if budget < self.config.n_init:
            raise ValueError(f"budget {budget} is smaller than n_init {self.config.n_init}")
        while len(self.target) < budget:
            config = self.ask()
            self.tell(config, objective_fn(config))
            logger.debug("trial %d: %s", len(self.target) - 1, config)
        return list(self.target.observations)


class MOTPE:
    """Standalone (MO-)TPE: rank split, KDE ratio, argmax over candidates.

    Shares the random-stream layout of :class:`MetaLearnTPE`, so with no
    meta-tasks and ``epsilon = 0`` both make the same decisions.
    """

    def __init__(self, space: SearchSpace, config: OptimizerConfig = OptimizerConfig(),
                 rule: BandwidthRule = BandwidthRule()):
        self.space = space
        self.config = config
        self.rule = rule
        self.streams = make_streams(config.seed)
        self.units: list[np.ndarray] = []
        self.values: list[np.ndarray] = []
        self.history: list[Observation] = []

    def ask(self) -> Config:
        if len(self.history) < self.config.n_init:
            return sample_uniform(self.space, self.streams.init)
        units = np.array(self.units)
        lower, upper = split_indices(np.array(self.values), self.config.gamma)
        l = KDE(units[lower], self.space, rule=self.rule)
        g = KDE(units[upper], self.space, rule=self.rule) if len(upper) else None
        cands = self.space.snap(l.sample(self.config.n_candidates, self.streams.candidates))
        log_l = np.maximum(l.log_pdf(cands), _LOG_FLOOR)
        log_g = np.maximum(g.log_pdf(cands), _LOG_FLOOR) if g is not None else 0.0
        return self.space.from_unit(cands[int(np.argmax(log_l - log_g))])

    def tell(self, config: Mapping[str, Any], objectives) -> Observation:
        obs = Observation(dict(config), objectives, trial_index=len(self.history))
        self.units.append(self.space.to_unit(config))
        self.values.append(obs.objectives)
        self.history.append(obs)
        return obs

    def run(self, objective_fn: Callable[[Config], Any], budget: int) -> list[Observation]:
        if budget < self.config.n_init:
            raise ValueError(f"budget {budget} is smaller than n_init {self.config.n_init}")
        while len(self.history) < budget:
            config = self.ask()
            self.tell(config, objective_fn(config))
        return list(self.history)
