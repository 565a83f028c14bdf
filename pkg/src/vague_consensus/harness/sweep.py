"""Grid sweeps: seed derivation, (optionally parallel) execution and aggregation."""

from __future__ import annotations

import logging
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from vague_consensus.engine import Mode, run
from vague_consensus.harness.config import EXPERIMENTS, ExperimentConfig
from vague_consensus.harness.output import METRICS, AggregateRow, write_atomic, write_outputs, write_series

log = logging.getLogger(__name__)

_MODES = [m.value for m in Mode]


def run_seed(master_seed: int, key: tuple, run_index: int) -> np.random.SeedSequence:
    """Independent stream for one run, a pure function of (master seed, cell, run)."""
    experiment, mode, n, gamma, alpha = key
    spawn_key = (
        EXPERIMENTS.index(experiment),
        _MODES.index(mode),
        int(n),
        int(round(gamma * 1e9)),
        int(round(alpha * 1e9)),
        int(run_index),
    )
    return np.random.SeedSequence(master_seed, spawn_key=spawn_key)


def _one_run(task):
    out_dir, master_seed, key, cfg, run_index, keep_trajectory = task
    result = run(cfg, run_seed(master_seed, key, run_index))
    if out_dir is not None:
        write_series(out_dir, key, run_index, result.series)
    trajectory = [(s.iteration, s.unique_beliefs) for s in result.series] if keep_trajectory else None
    return result.final, trajectory


def aggregate(key: tuple, finals: list) -> AggregateRow:
    stats = []
    for _, attr in METRICS:
        values = [float(getattr(s, attr)) for s in finals]
        mean = math.fsum(values) / len(values)
        sd = statistics.stdev(values) if len(values) > 1 else 0.0
        stats.append((mean, sd))
    experiment, mode, n, gamma, alpha = key
    return AggregateRow(experiment, mode, n, gamma, alpha, len(finals), tuple(stats))


@dataclass
class SweepResult:
    rows: list
    trajectories: list
    paths: list


def execute_sweep(config: ExperimentConfig, write: bool = True) -> SweepResult:
    """Run every cell ``config.runs`` times and aggregate the final snapshots.

    Output is independent of ``config.jobs``: results are folded in canonical
    (cell, run) order after everything has finished.
    """
    out_dir = Path(config.output_dir) if write else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_atomic(out_dir / "resolved_config.txt", config.to_text())
    cells = config.cells()
    keep = config.experiment == "evidence"
    tasks = [
        (out_dir, config.master_seed, key, cfg, r, keep)
        for key, cfg in cells
        for r in range(config.runs)
    ]
    log.info("sweep: %d cells x %d runs", len(cells), config.runs)
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_one_run, tasks, chunksize=max(1, len(tasks) // (8 * config.jobs))))
    else:
        results = [_one_run(t) for t in tasks]

    rows, trajectories = [], []
    for c, (key, _) in enumerate(cells):
        chunk = results[c * config.runs:(c + 1) * config.runs]
        rows.append(aggregate(key, [final for final, _ in chunk]))
        if keep:
            iterations = [it for it, _ in chunk[0][1]]
            means = [math.fsum(traj[k][1] for _, traj in chunk) / len(chunk) for k in range(len(iterations))]
            trajectories.append((key, list(zip(iterations, means))))

    paths = []
    if out_dir is not None:
        paths = write_outputs(out_dir, rows, trajectories)
    return SweepResult(rows, trajectories, paths)
