"""Agent population, pairing strategies and the per-iteration update loop.

Three regimes share one loop:

* consensus only: a selected pair combines if their inconsistency is at most gamma;
* consensus plus evidence: as above, then with probability alpha one random
  agent learns the true value of one random proposition;
* evidence only: the evidence lottery alone.

Pairs are drawn uniformly, or with probability proportional to the product of
the two agents' payoff-based fitness.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from vague_consensus import _kernels
from vague_consensus.belief import (
    BeliefState,
    DimensionError,
    InvalidWorldError,
    _arr,
    _wrap,
    world_array,
)

log = logging.getLogger(__name__)

DRAWS = _kernels.DRAWS_PER_ITERATION


class ConfigError(ValueError):
    pass


class Mode(enum.Enum):
    CONSENSUS_ONLY = "consensus"
    CONSENSUS_PLUS_EVIDENCE = "combined"
    EVIDENCE_ONLY = "evidence_only"

    @property
    def consensus(self) -> bool:
        return self is not Mode.EVIDENCE_ONLY

    @property
    def evidence(self) -> bool:
        return self is not Mode.CONSENSUS_ONLY


class Strategy(enum.Enum):
    UNIFORM = "uniform"
    QUALITY = "quality"


@dataclass(frozen=True)
class RegimeConfig:
    mode: Mode
    gamma: float
    alpha: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass
class Population:
    """Mutable agent beliefs, shape ``(N, n, 2)``, plus the hidden Boolean world."""

    beliefs: np.ndarray
    world: np.ndarray

    def __post_init__(self):
        self.beliefs = np.ascontiguousarray(self.beliefs, dtype=np.float64)
        self.world = world_array(self.world)
        if self.beliefs.ndim != 3 or self.beliefs.shape[2] != 2:
            raise DimensionError(f"beliefs must have shape (N, n, 2), got {self.beliefs.shape}")
        if self.beliefs.shape[0] < 2:
            raise ConfigError("a population needs at least two agents")
        if self.beliefs.shape[1] != self.world.size:
            raise DimensionError("agents and world disagree on the number of propositions")

    @property
    def size(self) -> int:
        return self.beliefs.shape[0]

    @property
    def n(self) -> int:
        return self.beliefs.shape[1]

    def agent(self, k: int) -> BeliefState:
        return BeliefState.from_array(self.beliefs[k])

    def fitness(self) -> np.ndarray:
        return _kernels.fitness_all(self.beliefs, self.world)

    def copy(self) -> "Population":
        return Population(self.beliefs.copy(), self.world.copy())


@dataclass(frozen=True)
class MetricsSnapshot:
    iteration: int
    unique_beliefs: int
    mean_vagueness: float
    mean_entropy: float
    mean_pairwise_inconsistency: float
    mean_payoff_pct: float

    FIELDS = (
        "iteration",
        "unique_beliefs",
        "mean_vagueness",
        "mean_entropy",
        "mean_pairwise_inconsistency",
        "mean_payoff_pct",
    )

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, f) for f in self.FIELDS)


@dataclass
class StepReport:
    pair: Optional[tuple] = None
    combined: bool = False
    evidence: Optional[tuple] = None
    fallback: bool = False


def init_population(size: int, n: int, rng: np.random.Generator) -> Population:
    """Random beliefs, uniform on ``{(x, y): x <= y}`` per proposition, and a random world."""
    if size < 2:
        raise ConfigError(f"need at least 2 agents, got {size}")
    if n < 1:
        raise ConfigError(f"need at least 1 proposition, got {n}")
    u = rng.random((size, n, 2))
    beliefs = np.sort(u, axis=2)
    world = (rng.random(n) < 0.5).astype(np.float64)
    return Population(beliefs, world)


def _select(pop, strategy, u1, u2, fitness=None):
    if strategy is Strategy.QUALITY:
        if fitness is None:
            fitness = pop.fitness()
        i, j = _kernels.pick_weighted_pair(fitness, u1, u2)
        if i >= 0:
            return (int(i), int(j)), False
        log.warning("all pair weights are zero; falling back to uniform selection")
    i, j = _kernels.pick_uniform_pair(pop.size, u1, u2)
    return (int(i), int(j)), strategy is Strategy.QUALITY


def select_pair(pop: Population, strategy: Strategy, rng: np.random.Generator) -> tuple:
    u1, u2 = rng.random(2)
    return _select(pop, strategy, u1, u2)[0]


def attempt_consensus(pop: Population, i: int, j: int, gamma: float) -> bool:
    """Combine agents ``i`` and ``j`` in place if their inconsistency is at most ``gamma``.

    Both agents adopt the same combined belief.
    """
    if i == j:
        raise ValueError("an agent cannot interact with itself")
    return bool(_kernels.try_combine(pop.beliefs, i, j, gamma))


def evidence_update(b, prop: int, truth: int):
    """Compromise between a belief and certain evidence about one proposition.

    ``(l, u)`` becomes ``(u, 1)`` when the proposition is true and ``(0, l)``
    when false; the other propositions are untouched.
    """
    a = _arr(b).copy()
    if a.ndim != 2:
        raise DimensionError("evidence_update takes a single (n, 2) belief")
    if not 0 <= prop < a.shape[0]:
        raise DimensionError(f"proposition index {prop} out of range for n={a.shape[0]}")
    if truth not in (0, 1):
        raise InvalidWorldError(f"evidence must be 0 or 1, got {truth!r}")
    _kernels.evidence_row(a, prop, int(truth))
    return _wrap(a, b)


def step(
    pop: Population,
    regime: RegimeConfig,
    strategy: Strategy,
    rng: np.random.Generator,
    fitness: Optional[np.ndarray] = None,
) -> StepReport:
    """One iteration: consensus attempt first, then the evidence lottery.

    Draws exactly ``DRAWS`` uniforms whatever happens, so a sequence of
    ``step`` calls matches :func:`run` on the same stream. ``fitness`` may be
    passed to avoid recomputing it; it is updated in place.
    """
    u = rng.random(DRAWS)
    report = StepReport()
    if regime.mode.consensus:
        if strategy is Strategy.QUALITY and fitness is None:
            fitness = pop.fitness()
        (i, j), report.fallback = _select(pop, strategy, u[0], u[1], fitness)
        report.pair = (i, j)
        report.combined = attempt_consensus(pop, i, j, regime.gamma)
        if report.combined and fitness is not None:
            fitness[i] = fitness[j] = _kernels.payoff_row(pop.beliefs[i], pop.world) + pop.n
    if regime.mode.evidence and u[2] < regime.alpha:
        k = int(_kernels._index(u[3], pop.size))
        p = int(_kernels._index(u[4], pop.n))
        _kernels.evidence_row(pop.beliefs[k], p, int(pop.world[p]))
        report.evidence = (k, p)
        if fitness is not None:
            fitness[k] = _kernels.payoff_row(pop.beliefs[k], pop.world) + pop.n
    return report


def count_unique(beliefs: np.ndarray) -> int:
    """Number of distinct agent beliefs under bitwise equality."""
    rows = np.ascontiguousarray(beliefs.reshape(beliefs.shape[0], -1))
    keys = rows.view(np.dtype((np.void, rows.dtype.itemsize * rows.shape[1]))).ravel()
    return int(np.unique(keys).size)


def snapshot(
    pop: Population,
    iteration: int,
    pair_sample_size: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> MetricsSnapshot:
    """Population statistics.

    Pairwise inconsistency is averaged over all unordered pairs when
    ``pair_sample_size`` is None (or at least the number of pairs), otherwise
    over that many uniformly drawn distinct pairs taken from ``rng``.
    """
    size = pop.size
    n_pairs = size * (size - 1) // 2
    if pair_sample_size is None or pair_sample_size >= n_pairs:
        incons = _kernels.mean_inconsistency_all(pop.beliefs)
    else:
        if rng is None:
            raise ValueError("sampled pairwise inconsistency needs an rng")
        first = rng.integers(size, size=pair_sample_size)
        second = rng.integers(size - 1, size=pair_sample_size)
        second += second >= first
        incons = _kernels.mean_inconsistency_pairs(pop.beliefs, first, second)
    vag, ent, pay = _kernels.population_stats(pop.beliefs, pop.world)
    return MetricsSnapshot(
        iteration=int(iteration),
        unique_beliefs=count_unique(pop.beliefs),
        mean_vagueness=float(vag),
        mean_entropy=float(ent),
        mean_pairwise_inconsistency=float(incons),
        mean_payoff_pct=float(100.0 * pay / (size * pop.n)),
    )


@dataclass(frozen=True)
class RunConfig:
    """One cell of an experiment: everything a single run needs besides its seed."""

    n: int
    gamma: float
    alpha: float = 0.0
    mode: Mode = Mode.CONSENSUS_ONLY
    strategy: Strategy = Strategy.UNIFORM
    agents: int = 1000
    iterations: int = 50_000
    snapshot_interval: int = 100
    # None = all pairs at every snapshot
    pair_sample_size: Optional[int] = 10_000

    def __post_init__(self):
        RegimeConfig(self.mode, self.gamma, self.alpha)
        if self.agents < 2 or self.n < 1:
            raise ConfigError("need at least 2 agents and 1 proposition")
        if self.iterations < 0:
            raise ConfigError("iterations must be non-negative")
        if self.snapshot_interval < 1:
            raise ConfigError("snapshot_interval must be positive")

    @property
    def regime(self) -> RegimeConfig:
        return RegimeConfig(self.mode, self.gamma, self.alpha)


@dataclass
class RunResult:
    series: list
    counts: dict = field(default_factory=dict)
    population: Optional[Population] = None

    @property
    def final(self) -> MetricsSnapshot:
        return self.series[-1]

    def at(self, iteration: int) -> MetricsSnapshot:
        for snap in self.series:
            if snap.iteration == iteration:
                return snap
        raise KeyError(iteration)


def streams(seed: Union[int, np.random.SeedSequence]) -> tuple:
    """Simulation and metrics generators derived from one seed."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    sim, metrics = ss.spawn(2)
    return np.random.Generator(np.random.PCG64(sim)), np.random.Generator(np.random.PCG64(metrics))


def run(cfg: RunConfig, seed: Union[int, np.random.SeedSequence]) -> RunResult:
    """Simulate one cell for one seed.

    Snapshots are taken at iteration 0, every ``snapshot_interval`` iterations
    and at the last iteration. Iteration 0 and the last snapshot average
    inconsistency over all pairs; the others use ``pair_sample_size`` pairs.
    """
    sim_rng, metrics_rng = streams(seed)
    pop = init_population(cfg.agents, cfg.n, sim_rng)
    weighted = cfg.strategy is Strategy.QUALITY and cfg.mode.consensus
    fitness = pop.fitness() if weighted else np.zeros(0)

    series = [snapshot(pop, 0, None, metrics_rng)]
    totals = np.zeros(4, dtype=np.int64)
    done = 0
    while done < cfg.iterations:
        chunk = min(cfg.snapshot_interval - done % cfg.snapshot_interval, cfg.iterations - done)
        uniforms = sim_rng.random((chunk, DRAWS))
        totals += _kernels.simulate(
            pop.beliefs, pop.world, fitness, uniforms, cfg.gamma, cfg.alpha,
            cfg.mode.consensus, cfg.mode.evidence, weighted,
        )
        done += chunk
        sample = None if done == cfg.iterations else cfg.pair_sample_size
        series.append(snapshot(pop, done, sample, metrics_rng))

    counts = dict(zip(("attempts", "combined", "evidence", "fallbacks"), map(int, totals)))
    if counts["fallbacks"]:
        log.warning("%d selections fell back to uniform: no pair had positive weight", counts["fallbacks"])
    return RunResult(series, counts, pop)
