"""Command line entry point: ``run``, ``sweep`` and ``verify``.

Exit codes: 0 success, 1 failed verification, 2 usage or configuration
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from vague_consensus.engine import ConfigError
from vague_consensus.harness.config import (
    ExperimentConfig,
    build_config,
    default_jobs,
    parse_grid,
    parse_ints,
    parse_modes,
    read_config_file,
)
from vague_consensus.harness.output import METRICS, cell_name
from vague_consensus.harness.sweep import execute_sweep

EXIT_USAGE, EXIT_IO = 2, 3

# defaults for `run`, which must resolve to exactly one cell
RUN_DEFAULTS = {"language_sizes": [5], "evidence_rates": [0.30], "modes": "combined"}


def _add_grid_flags(p):
    p.add_argument("--config", metavar="FILE", help="flat key=value config file")
    p.add_argument("--experiment", choices=["random", "evidence", "quality"])
    p.add_argument("--agents", type=int)
    sizes = p.add_mutually_exclusive_group()
    sizes.add_argument("--language-size", type=int, dest="language_size")
    sizes.add_argument("--language-sizes", dest="language_sizes", metavar="LIST")
    gamma = p.add_mutually_exclusive_group()
    gamma.add_argument("--gamma", type=float)
    gamma.add_argument("--gamma-grid", dest="gamma_grid", metavar="START:STOP:STEP|LIST")
    rates = p.add_mutually_exclusive_group()
    rates.add_argument("--evidence-rate", type=float, dest="evidence_rate")
    rates.add_argument("--evidence-rates", dest="evidence_rates", metavar="LIST")
    p.add_argument("--mode", help="combined, evidence_only, both, or a comma list (evidence experiment)")
    p.add_argument("--iterations", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--snapshot-interval", type=int, dest="snapshot_interval")
    p.add_argument("--pair-sample-size", type=int, dest="pair_sample_size")
    p.add_argument("--jobs", type=int, default=None, help="parallel runs (default: $VC_JOBS or 1)")
    p.add_argument("--out", help="output directory")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vague-consensus", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_grid_flags(sub.add_parser("run", help="simulate a single cell"))
    _add_grid_flags(sub.add_parser("sweep", help="simulate a full parameter grid"))
    verify = sub.add_parser("verify", help="run the randomised belief-algebra checks")
    verify.add_argument("--cases", type=int, default=100_000)
    verify.add_argument("--seed", type=int, default=0)
    return parser


def _overrides(args) -> dict:
    out = {
        "experiment": args.experiment,
        "agents": args.agents,
        "iterations": args.iterations,
        "runs": args.runs,
        "master_seed": args.seed,
        "snapshot_interval": args.snapshot_interval,
        "pair_sample_size": args.pair_sample_size,
        "output_dir": args.out,
        "jobs": args.jobs,
    }
    try:
        if args.language_size is not None:
            out["language_sizes"] = [args.language_size]
        elif args.language_sizes is not None:
            out["language_sizes"] = parse_ints(args.language_sizes)
        if args.gamma is not None:
            out["gamma_grid"] = [args.gamma]
        elif args.gamma_grid is not None:
            out["gamma_grid"] = parse_grid(args.gamma_grid)
        if args.evidence_rate is not None:
            out["evidence_rates"] = [args.evidence_rate]
        elif args.evidence_rates is not None:
            out["evidence_rates"] = parse_grid(args.evidence_rates)
        if args.mode is not None:
            out["modes"] = parse_modes(args.mode)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot parse flag value: {exc}") from None
    return out


def parse_config(args) -> ExperimentConfig:
    """Defaults < config file < command-line flags."""
    file_values = read_config_file(args.config) if args.config else {}
    overrides = _overrides(args)
    if args.command == "run":
        merged = {**file_values, **{k: v for k, v in overrides.items() if v is not None}}
        experiment = merged.get("experiment", "random")
        if "gamma_grid" not in merged:
            raise ConfigError("gamma: run needs a single --gamma")
        for key, value in RUN_DEFAULTS.items():
            if key in merged:
                continue
            if key in ("evidence_rates", "modes") and experiment != "evidence":
                continue
            file_values[key] = parse_modes(value) if key == "modes" else value
    config = build_config(file_values, overrides)
    if args.command == "run":
        cells = config.cells()
        if len(cells) != 1:
            raise ConfigError(f"run: parameters span {len(cells)} cells; use sweep for grids")
    return config


def _cmd_verify(args) -> int:
    from vague_consensus.verify import run_checks

    checks = run_checks(args.cases, args.seed)
    for check in checks:
        print(check.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 0 if failed == 0 else 1


def _report(result) -> None:
    stems = [stem for stem, _ in METRICS]
    print("cell," + ",".join(f"{s}_mean" for s in stems))
    for row in result.rows:
        key = (row.experiment, row.mode, row.n, row.gamma, row.alpha)
        print(cell_name(key) + "," + ",".join(f"{row.mean(s):.6g}" for s in stems))


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.command == "verify":
        return _cmd_verify(args)
    if args.jobs is None:
        args.jobs = default_jobs()
    try:
        config = parse_config(args)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"{parser.prog}: error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = execute_sweep(config)
    except OSError as exc:
        print(f"{parser.prog}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    _report(result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
