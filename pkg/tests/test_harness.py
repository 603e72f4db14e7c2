import csv
import json
import subprocess
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from qcs.errors import ConfigError, InvalidParameterError, NumericalError
from qcs.harness import ExperimentConfig, aggregate, emit_plot, fit_loglog_slope, geometric_grid, run_experiment
from qcs.harness import cli
from qcs.harness.analysis import AggregatePoint, fit_points, upper_half
from qcs.harness.runner import COLUMNS, TrialRecord, child_seed, read_records, records_to_csv, trial_plan

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL = """
experiment = decay_vs_m
set = sparse
n = 64
k = 2
sensing = gaussian
deltas = 0.5, 1
m_grid = 16, 32, 64
trials = 3
base_seed = 5
"""


def _record(m, error, delta=1.0, set_="sparse"):
    return TrialRecord("t", set_, "gaussian", 512, 4, m, delta, True, 0, 0, error)


def test_parse_full_config():
    cfg = ExperimentConfig.load(CONFIGS / "decay_sparse.cfg")
    assert (cfg.n, cfg.k, cfg.sensing, cfg.trials, cfg.base_seed) == (512, 4, "gaussian", 100, 2019)
    assert cfg.deltas == [0.5, 1.0, 2.0]
    assert len(cfg.m_grid) == 12 and cfg.m_grid[0] == 112 and cfg.m_grid[-1] == 512
    assert cfg.dithering and cfg.experiment_id == "decay_sparse"


def test_every_shipped_config_parses():
    files = sorted(CONFIGS.glob("*.cfg"))
    assert len(files) >= 10
    for path in files:
        ExperimentConfig.load(path)


def test_default_grid_from_budget():
    cfg = ExperimentConfig.from_text("set = sparse\nn = 512\nk = 4\n")
    assert cfg.m_grid[0] == 112 and cfg.m_grid[-1] == 512 and len(cfg.m_grid) == 12
    low = ExperimentConfig.from_text("set = lowrank\nn1 = 32\nn2 = 32\nr = 2\n")
    assert low.n == 1024 and low.m_grid[0] == 128 and low.m_grid[-1] == 1024


def test_geometric_grid():
    assert geometric_grid(1, 100, 3) == [1, 10, 100]
    grid = geometric_grid(112, 512, 12)
    assert grid == sorted(set(grid))


@pytest.mark.parametrize("text", [
    "experiment = nope",
    "set = sparse\nn = 64\nk = 2\nm_grid = 128",  # m > n
    "trials = 0",
    "deltas = 0",
    "deltas = -1, 2",
    "sensing = fourier",
    "colour = blue",
    "n = many",
    "just a line",
    "dithering = maybe",
    "set = lowrank\nn1 = 4\nn2 = 4\nr = 5",
    "experiment = diagnose\nset = compressible",
    "m_grid = geometric(10, 5, 3)",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text(text)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "absent.cfg")


def test_single_trial_single_row(tmp_path):
    cfg = ExperimentConfig.from_text("n = 64\nk = 2\nm_grid = 32\ntrials = 1\n")
    res = run_experiment(cfg, tmp_path / "one.csv")
    lines = (tmp_path / "one.csv").read_text().splitlines()
    assert len(res.records) == 1 and len(lines) == 2
    assert lines[0] == ",".join(COLUMNS)


def test_row_count_and_order(tmp_path):
    cfg = ExperimentConfig.load(CONFIGS / "decay_sparse.cfg")
    cfg = replace(cfg, trials=2, output=None)
    res = run_experiment(cfg)
    assert len(res.records) == 3 * len(cfg.m_grid) * 2
    keys = [(r.m, cfg.deltas.index(r.delta), r.trial_index) for r in res.records]
    assert keys == sorted(keys)


def test_rerun_byte_identical_and_thread_invariant(tmp_path):
    cfg = ExperimentConfig.from_text(SMALL)
    run_experiment(cfg, tmp_path / "a.csv")
    run_experiment(cfg, tmp_path / "b.csv")
    run_experiment(cfg, tmp_path / "c.csv", threads=2)
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes() == (tmp_path / "c.csv").read_bytes()


def test_seeds_distinct_and_reproducible():
    cfg = ExperimentConfig.from_text(SMALL)
    plan = trial_plan(cfg)
    seeds = [child_seed(cfg.base_seed, *p) for p in plan]
    assert len(set(seeds)) == len(plan)
    assert child_seed(5, 16, 0, 0) == child_seed(5, 16, 0, 0) != child_seed(6, 16, 0, 0)


def test_csv_format(tmp_path):
    cfg = ExperimentConfig.from_text(SMALL)
    res = run_experiment(cfg, tmp_path / "r.csv")
    with open(tmp_path / "r.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == COLUMNS
    for row in rows[1:]:
        assert row[7] in ("true", "false")
        err = row[-1]
        assert "," not in err and float(err) >= 0
        assert len(err.replace(".", "").replace("-", "").split("e")[0].lstrip("0")) <= 9
    back = read_records(tmp_path / "r.csv")
    assert [r.m for r in back] == [r.m for r in res.records]
    np.testing.assert_allclose([r.error for r in back], [r.error for r in res.records], rtol=1e-8)
    assert records_to_csv(back) == (tmp_path / "r.csv").read_text()


def test_read_records_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigError):
        read_records(path)


def test_errors_nonnegative_for_every_set(tmp_path):
    for text in ("set = compressible\nn = 64\nk = 4\nm_grid = 32\ntrials = 2",
                 "set = lowrank\nn1 = 6\nn2 = 5\nr = 1\nm_grid = 20\ntrials = 2\nsensing = sors",
                 "set = sparse\nn = 64\nk = 2\nm_grid = 32\ntrials = 2\ndithering = off\nsensing = pdct"):
        res = run_experiment(ExperimentConfig.from_text(text))
        assert all(r.error >= 0 for r in res.records)


def test_diagnose_writes_audit(tmp_path):
    cfg = ExperimentConfig.from_text(
        "experiment = diagnose\nn = 128\nk = 3\nm_grid = 64\ntrials = 2\naudit_samples = 200")
    res = run_experiment(cfg, tmp_path / "d.csv")
    assert len(res.audits) == 2
    lines = (tmp_path / "d.audit.csv").read_text().splitlines()
    assert lines[0].startswith("m,delta") and len(lines) == 3


def test_slope_examples():
    exact = [_record(1, 1.0), _record(10, 0.1), _record(100, 0.01)]
    fit = fit_loglog_slope(exact)[("sparse", "gaussian", 1.0, True)]
    assert fit.slope == pytest.approx(-1.0, abs=1e-12) and fit.r2 == pytest.approx(1.0)
    flat = [_record(m, 0.3) for m in (10, 20, 40, 80)]
    fit = fit_loglog_slope(flat)[("sparse", "gaussian", 1.0, True)]
    assert fit.slope == pytest.approx(0.0, abs=1e-12) and fit.r2 == 1.0
    zero = [_record(m, 0.0) for m in (10, 20, 40)]
    fit = fit_loglog_slope(zero)[("sparse", "gaussian", 1.0, True)]
    assert fit.degenerate and np.isnan(fit.slope)


def test_slope_uses_median_and_reports_mean():
    recs = [_record(m, e) for m in (10, 100, 1000) for e in (1 / m, 1 / m, 10 / m)]
    fit = fit_loglog_slope(recs)[("sparse", "gaussian", 1.0, True)]
    assert fit.slope == pytest.approx(-1.0) and fit.mean_slope == pytest.approx(-1.0)
    assert fit.intercept == pytest.approx(0.0, abs=1e-12)
    assert fit.mean_intercept == pytest.approx(np.log(4.0))


def test_slope_needs_three_points_and_window():
    with pytest.raises(InvalidParameterError):
        fit_loglog_slope([_record(10, 1.0), _record(20, 0.5)])
    recs = [_record(m, m ** -0.5 if m < 100 else m ** -1.0) for m in (10, 20, 40, 100, 200, 400)]
    fit = fit_loglog_slope(recs, x_min=100)[("sparse", "gaussian", 1.0, True)]
    assert fit.slope == pytest.approx(-1.0) and fit.points == 3
    assert upper_half([1, 2, 3, 4]) == 3 and upper_half([1, 2, 3, 4, 5]) == 3


def test_fit_points_single_group():
    pts = [AggregatePoint(("g",), x, x**-0.5, x**-0.5, 1) for x in (4.0, 16.0, 64.0)]
    assert fit_points(pts).slope == pytest.approx(-0.5)


def test_plot_three_curves_and_guides(tmp_path):
    recs = [_record(m, d / np.sqrt(m), delta=d) for d in (0.5, 1.0, 2.0) for m in (112, 200, 512)]
    res = emit_plot(recs, tmp_path / "fig.svg")
    assert res.curves == 3 and res.guides == 2
    assert res.figure.read_text().lstrip().startswith("<?xml")
    with open(res.sidecar, newline="") as fh:
        rows = list(csv.DictReader(fh))
    agg = aggregate(recs)
    assert [float(r["median_error"]) for r in rows] == [p.median for p in agg]


def test_plot_single_record(tmp_path):
    res = emit_plot([_record(128, 0.2)], tmp_path / "one.pdf")
    assert res.curves == 1 and res.guides == 0 and res.figure.stat().st_size > 0


def test_plot_delta_style(tmp_path):
    recs = [_record(256, d, delta=d) for d in (0.125, 1.0, 8.0)]
    res = emit_plot(recs, tmp_path / "delta.svg")
    assert res.curves == 1 and res.guides == 0
    assert "delta" in res.sidecar.read_text().splitlines()[0]


def test_plot_empty_is_usage_error(tmp_path):
    with pytest.raises(InvalidParameterError):
        emit_plot([], tmp_path / "x.svg")


def test_cli_run_slope_plot(tmp_path, capsys):
    cfg = tmp_path / "small.cfg"
    cfg.write_text(SMALL)
    out = tmp_path / "out.csv"
    assert cli.main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    assert cli.main(["slope", "--in", str(out)]) == 0
    printed = capsys.readouterr().out.splitlines()
    assert printed[-3].startswith("set\tsensing") and len(printed) == 4
    assert cli.main(["plot", "--in", str(out), "--out", str(tmp_path / "p.svg")]) == 0
    assert (tmp_path / "p.svg").exists() and (tmp_path / "p.data.csv").exists()


def test_cli_exit_codes(tmp_path, monkeypatch):
    bad = tmp_path / "bad.cfg"
    bad.write_text("trials = 0\n")
    assert cli.main(["run", "--config", str(bad), "--out", str(tmp_path / "x.csv")]) == 2
    assert cli.main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert cli.main(["bogus"]) == 2
    assert cli.main(["slope", "--in", str(tmp_path / "missing.csv")]) == 2

    def boom(*args, **kwargs):
        raise NumericalError("SVD did not converge")

    monkeypatch.setattr(cli.diagnostics, "rip_distortion_estimate", boom)
    assert cli.main(["diagnose", "rip", "--m", "16", "--n", "32", "--samples", "4"]) == 3


@pytest.mark.parametrize("argv, key", [
    (["diagnose", "rip", "--m", "64", "--n", "128", "--samples", "100"], "max_distortion"),
    (["diagnose", "lpd", "--m", "64", "--n", "128", "--samples", "100", "--fresh-dither"], "max_distortion"),
    (["diagnose", "dither", "--a", "0.37", "--samples", "100000"], "within_band"),
    (["diagnose", "width", "--n", "64", "--sparsity", "4", "--samples", "2000"], "mean_width"),
])
def test_cli_diagnose(argv, key, capsys):
    assert cli.main(argv) == 0
    payload = json.loads(capsys.readouterr().out)
    assert key in payload
    if key == "within_band":
        assert payload["within_band"] is True


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qcs.harness.cli", "diagnose", "width", "--n", "8",
                           "--sparsity", "2", "--samples", "10"], capture_output=True, text=True)
    assert proc.returncode == 0 and "mean_width" in proc.stdout
