"""CSV emission: summary, per-run series and per-figure extracts."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from vague_consensus.engine import MetricsSnapshot

# summary column stem -> MetricsSnapshot field
METRICS = (
    ("unique", "unique_beliefs"),
    ("vagueness", "mean_vagueness"),
    ("entropy", "mean_entropy"),
    ("inconsistency", "mean_pairwise_inconsistency"),
    ("payoff_pct", "mean_payoff_pct"),
)

SUMMARY_HEADER = ["experiment", "mode", "n", "gamma", "alpha", "runs"] + [
    f"{stem}_{stat}" for stem, _ in METRICS for stat in ("mean", "sd")
]

# experiment -> [(figure id, metric stem)], all plotted against gamma
FIGURES = {
    "random": [(1, "unique"), (2, "vagueness"), (3, "entropy"), (4, "inconsistency")],
    "evidence": [(5, "unique"), (7, "vagueness"), (8, "entropy"), (9, "inconsistency"), (10, "payoff_pct")],
    "quality": [(11, "unique"), (12, "vagueness"), (13, "entropy"), (14, "inconsistency"), (15, "payoff_pct")],
}
TRAJECTORY_FIGURE = 6


@dataclass(frozen=True)
class AggregateRow:
    experiment: str
    mode: str
    n: int
    gamma: float
    alpha: float
    runs: int
    stats: tuple  # (mean, sd) per METRICS entry, in order

    def mean(self, stem: str) -> float:
        return self.stats[_stem_index(stem)][0]

    def sd(self, stem: str) -> float:
        return self.stats[_stem_index(stem)][1]

    def as_list(self) -> list:
        out = [self.experiment, self.mode, self.n, fmt(self.gamma), fmt(self.alpha), self.runs]
        for m, s in self.stats:
            out += [fmt(m), fmt(s)]
        return out


def _stem_index(stem):
    return [s for s, _ in METRICS].index(stem)


def fmt(x) -> str:
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def cell_name(key: tuple) -> str:
    experiment, mode, n, gamma, alpha = key
    return f"{experiment}_{mode}_n{n}_g{gamma:.4f}_a{alpha:.4f}"


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def series_csv(series) -> str:
    rows = [[fmt(v) for v in snap.as_tuple()] for snap in series]
    return to_csv(MetricsSnapshot.FIELDS, rows)


def series_path(out_dir, key, run_index) -> Path:
    return Path(out_dir) / "series" / f"{cell_name(key)}_run{run_index}.csv"


def write_series(out_dir, key, run_index, series) -> Path:
    path = series_path(out_dir, key, run_index)
    write_atomic(path, series_csv(series))
    return path


def read_series(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        MetricsSnapshot(
            iteration=int(r["iteration"]),
            unique_beliefs=int(r["unique_beliefs"]),
            mean_vagueness=float(r["mean_vagueness"]),
            mean_entropy=float(r["mean_entropy"]),
            mean_pairwise_inconsistency=float(r["mean_pairwise_inconsistency"]),
            mean_payoff_pct=float(r["mean_payoff_pct"]),
        )
        for r in rows
    ]


def figure_tables(rows, trajectories=None) -> dict:
    """Figure id -> (header, rows). Views over the summary rows only,
    except the unique-beliefs trajectory, which averages the run series."""
    if not rows:
        return {}
    experiment = rows[0].experiment
    tables = {}
    for fig, stem in FIGURES[experiment]:
        if experiment == "evidence":
            header = ["mode", "alpha", "gamma", f"{stem}_mean", f"{stem}_sd"]
            body = [[r.mode, fmt(r.alpha), fmt(r.gamma), fmt(r.mean(stem)), fmt(r.sd(stem))] for r in rows]
        else:
            header = ["n", "gamma", f"{stem}_mean", f"{stem}_sd"]
            body = [[r.n, fmt(r.gamma), fmt(r.mean(stem)), fmt(r.sd(stem))] for r in rows]
        tables[fig] = (header, body)
    if experiment == "evidence" and trajectories:
        body = []
        for (exp, mode, n, gamma, alpha), points in trajectories:
            for iteration, unique_mean in points:
                body.append([mode, fmt(alpha), fmt(gamma), iteration, fmt(unique_mean)])
        tables[TRAJECTORY_FIGURE] = (["mode", "alpha", "gamma", "iteration", "unique_mean"], body)
    return tables


def write_outputs(out_dir, rows, trajectories=None, config_text=None) -> list:
    """Write summary.csv, figure_<id>.csv and resolved_config.txt; return the paths.

    Per-run series files are written as runs complete (see :func:`write_series`).
    """
    out = Path(out_dir)
    written = []
    if config_text is not None:
        write_atomic(out / "resolved_config.txt", config_text)
        written.append(out / "resolved_config.txt")
    write_atomic(out / "summary.csv", to_csv(SUMMARY_HEADER, [r.as_list() for r in rows]))
    written.append(out / "summary.csv")
    for fig, (header, body) in sorted(figure_tables(rows, trajectories).items()):
        path = out / f"figure_{fig}.csv"
        write_atomic(path, to_csv(header, body))
        written.append(path)
    return written
