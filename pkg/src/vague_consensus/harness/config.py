"""Experiment configuration: defaults, flat ``key=value`` files and validation."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from vague_consensus.engine import ConfigError, Mode, RunConfig, Strategy

EXPERIMENTS = ("random", "evidence", "quality")
EVIDENCE_MODES = (Mode.CONSENSUS_PLUS_EVIDENCE, Mode.EVIDENCE_ONLY)


def parse_grid(text: str) -> list:
    """``"0:1:0.02"`` (inclusive) or a comma list ``"0.1,0.5"``."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid must be start:stop:step, got {text!r}")
        start, stop, step_ = map(float, parts)
        if step_ <= 0 or stop < start:
            raise ConfigError(f"bad grid {text!r}")
        count = int(round((stop - start) / step_)) + 1
        values = [round(start + k * step_, 10) for k in range(count)]
        return [v for v in values if v <= stop + 1e-9]
    return [float(x) for x in text.split(",") if x.strip()]


def parse_ints(text: str) -> list:
    return [int(x) for x in text.split(",") if x.strip()]


def parse_modes(text: str) -> list:
    out = []
    for token in text.split(","):
        token = token.strip().lower().replace("-", "_")
        if not token:
            continue
        if token == "both":
            out.extend(EVIDENCE_MODES)
            continue
        try:
            out.append(Mode(token))
        except ValueError:
            raise ConfigError(f"unknown mode {token!r}") from None
    return out


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("VC_JOBS", "1")))
    except ValueError:
        return 1


@dataclass
class ExperimentConfig:
    experiment: str = "random"
    agents: int = 1000
    language_sizes: Optional[list] = None
    gamma_grid: list = field(default_factory=lambda: parse_grid("0:1:0.02"))
    evidence_rates: Optional[list] = None
    modes: Optional[list] = None
    iterations: int = 50_000
    runs: int = 100
    master_seed: int = 0
    snapshot_interval: int = 100
    pair_sample_size: int = 10_000
    output_dir: str = "results"
    jobs: int = field(default_factory=default_jobs)

    def __post_init__(self):
        self.resolve()

    def resolve(self) -> "ExperimentConfig":
        """Fill experiment-dependent defaults and validate; raises ConfigError."""
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment: must be one of {', '.join(EXPERIMENTS)}")
        if self.language_sizes is None:
            self.language_sizes = [1, 3, 5] if self.experiment == "random" else [5]
        if self.experiment == "evidence":
            if self.evidence_rates is None:
                self.evidence_rates = [0.05, 0.15, 0.30]
            if self.modes is None:
                self.modes = list(EVIDENCE_MODES)
        else:
            if self.evidence_rates:
                raise ConfigError(f"evidence_rates: only meaningful for the evidence experiment, not {self.experiment!r}")
            if self.modes and self.modes != [Mode.CONSENSUS_ONLY]:
                raise ConfigError(f"modes: only selectable for the evidence experiment, not {self.experiment!r}")
            self.evidence_rates = []
            self.modes = [Mode.CONSENSUS_ONLY]

        _check(self.agents >= 2, "agents", "must be at least 2")
        _check(bool(self.language_sizes) and all(n >= 1 for n in self.language_sizes), "language_sizes", "need values >= 1")
        _check(bool(self.gamma_grid) and all(0.0 <= g <= 1.0 for g in self.gamma_grid), "gamma_grid", "values must lie in [0, 1]")
        _check(all(0.0 <= a <= 1.0 for a in self.evidence_rates), "evidence_rates", "values must lie in [0, 1]")
        if self.experiment == "evidence":
            _check(bool(self.evidence_rates), "evidence_rates", "need at least one rate")
            _check(bool(self.modes) and all(m in EVIDENCE_MODES for m in self.modes), "modes", "must be combined and/or evidence_only")
        _check(self.iterations >= 0, "iterations", "must be >= 0")
        _check(self.runs >= 1, "runs", "must be >= 1")
        _check(self.master_seed >= 0, "master_seed", "must be >= 0")
        _check(self.snapshot_interval >= 1, "snapshot_interval", "must be >= 1")
        _check(self.pair_sample_size >= 1, "pair_sample_size", "must be >= 1")
        _check(self.jobs >= 1, "jobs", "must be >= 1")
        return self

    @property
    def strategy(self) -> Strategy:
        return Strategy.QUALITY if self.experiment == "quality" else Strategy.UNIFORM

    def cells(self) -> list:
        """Canonically ordered ``(key, RunConfig)`` pairs for every grid cell."""
        alphas = self.evidence_rates or [0.0]
        out = []
        for mode in self.modes:
            for alpha in alphas:
                for n in self.language_sizes:
                    for gamma in self.gamma_grid:
                        cfg = RunConfig(
                            n=n, gamma=gamma, alpha=alpha, mode=mode, strategy=self.strategy,
                            agents=self.agents, iterations=self.iterations,
                            snapshot_interval=self.snapshot_interval,
                            pair_sample_size=self.pair_sample_size,
                        )
                        out.append(((self.experiment, mode.value, n, gamma, alpha), cfg))
        return out

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, list):
                value = ",".join(v.value if isinstance(v, Mode) else repr(v) for v in value)
            lines.append(f"{f.name}={value}")
        return "\n".join(lines) + "\n"


def _check(ok: bool, key: str, message: str):
    if not ok:
        raise ConfigError(f"{key}: {message}")


_PARSERS = {
    "experiment": str.strip,
    "agents": int,
    "language_sizes": parse_ints,
    "gamma_grid": parse_grid,
    "evidence_rates": parse_grid,
    "modes": parse_modes,
    "iterations": int,
    "runs": int,
    "master_seed": int,
    "snapshot_interval": int,
    "pair_sample_size": int,
    "output_dir": str.strip,
    "jobs": int,
}

KEYS = tuple(_PARSERS)


def parse_value(key: str, text: str):
    if key not in _PARSERS:
        raise ConfigError(f"{key}: unknown configuration key")
    try:
        return _PARSERS[key](text)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{key}: cannot parse {text!r}") from None


def read_config_file(path) -> dict:
    """Parse a flat ``key=value`` file; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, text = (s.strip() for s in line.split("=", 1))
        values[key] = parse_value(key, text)
    return values


def build_config(file_values: Optional[dict] = None, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Defaults, then config-file values, then explicit overrides."""
    merged = dict(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = set(merged) - set(KEYS)
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown configuration key")
    return ExperimentConfig(**merged)
