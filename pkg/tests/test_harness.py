import csv
import math

import pytest

from vague_consensus.cli import main, make_parser, parse_config
from vague_consensus.engine import ConfigError, Mode, Strategy
from vague_consensus.harness.config import ExperimentConfig, build_config, parse_grid, read_config_file
from vague_consensus.harness.output import SUMMARY_HEADER, read_series, series_path
from vague_consensus.harness.sweep import execute_sweep, run_seed


def cfg_from(argv):
    return parse_config(make_parser().parse_args(argv))


SMALL = ["--agents", "40", "--iterations", "400", "--runs", "2", "--snapshot-interval", "100"]


# -- configuration -----------------------------------------------------------


def test_run_single_gamma():
    cfg = cfg_from(["run", "--experiment", "random", "--gamma", "0.5", "--runs", "10", "--seed", "42"])
    assert cfg.gamma_grid == [0.5]
    assert cfg.runs == 10 and cfg.master_seed == 42
    assert len(cfg.cells()) == 1


def test_gamma_grid_is_inclusive():
    grid = parse_grid("0:1:0.02")
    assert len(grid) == 51
    assert grid[0] == 0.0 and grid[-1] == 1.0 and grid[14] == 0.28


def test_evidence_rate_rejected_for_random(capsys):
    assert main(["run", "--evidence-rate", "0.3", "--experiment", "random", "--gamma", "0.5"]) == 2
    assert "evidence_rates" in capsys.readouterr().err


def test_run_refuses_grids():
    with pytest.raises(ConfigError):
        cfg_from(["run", "--experiment", "random", "--gamma-grid", "0.1,0.2"])
    with pytest.raises(ConfigError):
        cfg_from(["run", "--experiment", "random"])


def test_defaults_per_experiment():
    random = ExperimentConfig(experiment="random")
    assert random.language_sizes == [1, 3, 5] and random.evidence_rates == [] and len(random.gamma_grid) == 51
    assert len(random.cells()) == 153
    evidence = ExperimentConfig(experiment="evidence")
    assert evidence.evidence_rates == [0.05, 0.15, 0.30]
    assert evidence.modes == [Mode.CONSENSUS_PLUS_EVIDENCE, Mode.EVIDENCE_ONLY]
    assert len(evidence.cells()) == 2 * 3 * 51
    quality = ExperimentConfig(experiment="quality")
    assert quality.strategy is Strategy.QUALITY and quality.language_sizes == [5]
    assert (random.agents, random.iterations, random.runs, random.snapshot_interval) == (1000, 50_000, 100, 100)


def test_file_then_flags_precedence(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text("# comment\nexperiment = evidence\nruns=7\niterations=900\nevidence_rates=0.1,0.2\n")
    cfg = cfg_from(["sweep", "--config", str(path), "--runs", "3"])
    assert cfg.experiment == "evidence"
    assert cfg.runs == 3
    assert cfg.iterations == 900
    assert cfg.evidence_rates == [0.1, 0.2]


def test_unknown_key_rejected(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("runs=2\ncolour=blue\n")
    with pytest.raises(ConfigError, match="colour"):
        read_config_file(path)
    assert main(["sweep", "--config", str(path)]) == 2
    with pytest.raises(ConfigError):
        build_config({}, {"bogus": 1})


@pytest.mark.parametrize(
    "argv",
    [
        ["sweep", "--gamma", "1.5"],
        ["sweep", "--runs", "0"],
        ["sweep", "--experiment", "quality", "--mode", "combined"],
        ["sweep", "--experiment", "evidence", "--mode", "sideways"],
    ],
)
def test_invalid_values_exit_2(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path)]) == 2


def test_unwritable_output_exits_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    argv = ["sweep", "--gamma", "0.5", "--language-size", "1", "--out", str(blocker / "sub")] + SMALL
    assert main(argv) == 3


def test_resolved_config_round_trips(tmp_path):
    cfg = ExperimentConfig(experiment="evidence", gamma_grid=[0.2, 0.8], runs=2, output_dir=str(tmp_path))
    path = tmp_path / "resolved.txt"
    path.write_text(cfg.to_text())
    assert build_config(read_config_file(path)) == cfg


def test_jobs_from_environment(monkeypatch):
    monkeypatch.setenv("VC_JOBS", "3")
    assert ExperimentConfig().jobs == 3


# -- seeds and sweeps --------------------------------------------------------


def test_run_seeds_are_distinct_per_cell_and_run():
    key = ("random", "consensus", 5, 0.5, 0.0)
    seeds = {
        tuple(run_seed(1, k, r).generate_state(2))
        for k in [key, ("random", "consensus", 5, 0.52, 0.0), ("random", "consensus", 3, 0.5, 0.0)]
        for r in range(3)
    }
    assert len(seeds) == 9
    assert (run_seed(1, key, 0).generate_state(2) == run_seed(1, key, 0).generate_state(2)).all()


@pytest.fixture(scope="module")
def evidence_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("evidence")
    argv = ["sweep", "--experiment", "evidence", "--gamma-grid", "0.2,0.8", "--evidence-rates", "0.05,0.3",
            "--language-size", "3", "--seed", "5", "--out", str(out)] + SMALL
    assert main(argv) == 0
    return out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_summary_schema(evidence_sweep):
    rows = read_csv(evidence_sweep / "summary.csv")
    assert rows[0] == SUMMARY_HEADER
    assert ",".join(rows[0]) == (
        "experiment,mode,n,gamma,alpha,runs,unique_mean,unique_sd,vagueness_mean,vagueness_sd,"
        "entropy_mean,entropy_sd,inconsistency_mean,inconsistency_sd,payoff_pct_mean,payoff_pct_sd"
    )
    assert len(rows) == 1 + 2 * 2 * 2
    for row in rows[1:]:
        assert len(row) == len(SUMMARY_HEADER)
        assert all(math.isfinite(float(x)) for x in row[2:])
    assert (evidence_sweep / "summary.csv").read_bytes().count(b"\r") == 0


def test_series_files(evidence_sweep):
    files = sorted((evidence_sweep / "series").glob("*.csv"))
    assert len(files) == 8 * 2
    for path in files:
        lines = path.read_text().splitlines()
        assert len(lines) == 400 // 100 + 2


def test_summary_recomputes_from_series(evidence_sweep):
    rows = read_csv(evidence_sweep / "summary.csv")
    header = rows[0]
    for row in rows[1:]:
        rec = dict(zip(header, row))
        key = (rec["experiment"], rec["mode"], int(rec["n"]), float(rec["gamma"]), float(rec["alpha"]))
        finals = [read_series(series_path(evidence_sweep, key, r))[-1] for r in range(int(rec["runs"]))]
        for stem, attr in [("unique", "unique_beliefs"), ("vagueness", "mean_vagueness"),
                           ("entropy", "mean_entropy"), ("inconsistency", "mean_pairwise_inconsistency"),
                           ("payoff_pct", "mean_payoff_pct")]:
            mean = sum(getattr(s, attr) for s in finals) / len(finals)
            assert abs(mean - float(rec[f"{stem}_mean"])) <= 1e-9


def test_figure_extracts(evidence_sweep):
    for fig in (5, 6, 7, 8, 9, 10):
        assert (evidence_sweep / f"figure_{fig}.csv").exists()
    fig5 = read_csv(evidence_sweep / "figure_5.csv")
    summary = read_csv(evidence_sweep / "summary.csv")
    assert fig5[0] == ["mode", "alpha", "gamma", "unique_mean", "unique_sd"]
    assert [r[6] for r in summary[1:]] == [r[3] for r in fig5[1:]]
    fig6 = read_csv(evidence_sweep / "figure_6.csv")
    assert fig6[0] == ["mode", "alpha", "gamma", "iteration", "unique_mean"]
    assert len(fig6) == 1 + 8 * 5


def test_resolved_config_written(evidence_sweep):
    text = (evidence_sweep / "resolved_config.txt").read_text()
    assert "experiment=evidence" in text and "master_seed=5" in text


def test_random_experiment_figures(tmp_path):
    argv = ["sweep", "--experiment", "random", "--gamma-grid", "0.3,0.9", "--language-sizes", "1,3",
            "--out", str(tmp_path)] + SMALL
    assert main(argv) == 0
    names = sorted(p.name for p in tmp_path.glob("figure_*.csv"))
    assert names == ["figure_1.csv", "figure_2.csv", "figure_3.csv", "figure_4.csv"]
    assert read_csv(tmp_path / "figure_1.csv")[0] == ["n", "gamma", "unique_mean", "unique_sd"]


def test_sweep_is_byte_identical_and_jobs_independent(tmp_path):
    base = ["sweep", "--experiment", "quality", "--gamma-grid", "0.4,0.9", "--seed", "11"] + SMALL
    outs = []
    for name, jobs in [("a", "1"), ("b", "1"), ("c", "2")]:
        out = tmp_path / name
        assert main(base + ["--out", str(out), "--jobs", jobs]) == 0
        outs.append(out)
    first = (outs[0] / "summary.csv").read_bytes()
    assert all((o / "summary.csv").read_bytes() == first for o in outs[1:])
    for path in sorted((outs[0] / "series").glob("*.csv")):
        assert (outs[2] / "series" / path.name).read_bytes() == path.read_bytes()


def test_sweep_without_writing():
    cfg = ExperimentConfig(experiment="random", language_sizes=[1], gamma_grid=[1.0], agents=30,
                           iterations=3000, runs=3, output_dir="unused")
    result = execute_sweep(cfg, write=False)
    assert len(result.rows) == 1
    row = result.rows[0]
    assert row.runs == 3
    assert row.mean("unique") == 1.0 and row.mean("vagueness") == 0.0
