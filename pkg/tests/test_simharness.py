import csv
import subprocess
import sys

import numpy as np
import pytest

from rootsbl import estimators
from rootsbl.array_model import ArrayGeometry, Scenario, synthesize_snapshots, write_snapshots
from rootsbl.errors import ContractError, NumericalError
from rootsbl.simharness import (
    ConfigError,
    SweepConfig,
    crb_curve,
    parse_config,
    rmse,
    run_monte_carlo,
    stochastic_crb,
    summarize,
    sweep_rmse,
    trial_seed,
    write_outputs,
)
from rootsbl.simharness.cli import main
from rootsbl.simharness.crb import crb_matrix

SMALL = """
sensors = 5
snapshots = 10
intervals = -30:-20, 0:10
snr_db = 10
grid_interval = 10
eta = 2
trials = 3
seed = 7
methods = root-sbl, ongrid-sbl
max_iters = 30
"""


# ---- rmse ---------------------------------------------------------------------

def test_rmse_examples():
    assert rmse([-24, 4], [-24, 4]) == 0.0
    assert rmse([4, -24], [-24, 4]) == 0.0
    assert rmse([-23, 5], [-24, 4]) == pytest.approx(1.0)


def test_rmse_symmetries():
    rng = np.random.default_rng(0)
    for _ in range(50):
        est, tru = rng.uniform(-60, 60, 4), rng.uniform(-60, 60, 4)
        perm = rng.permutation(4)
        assert rmse(est[perm], tru) == pytest.approx(rmse(est, tru), abs=1e-12)
        assert rmse(est[perm], tru[perm]) == pytest.approx(rmse(est, tru), abs=1e-12)


def test_rmse_length_mismatch():
    with pytest.raises(ContractError):
        rmse([1.0], [1.0, 2.0])


def test_sweep_rmse_pools_squared_errors_and_skips_nan():
    assert sweep_rmse([3.0, 4.0, float("nan")]) == pytest.approx(np.sqrt(12.5))
    assert np.isnan(sweep_rmse([float("nan")]))


# ---- CRB ------------------------------------------------------------------------

def test_crb_quarter_with_four_times_snapshots():
    geo = ArrayGeometry(7)
    a = stochastic_crb(Scenario(geo, (-25.0, 5.0), 30, 10.0))
    b = stochastic_crb(Scenario(geo, (-25.0, 5.0), 120, 10.0))
    assert b == pytest.approx(a / 2, rel=1e-12)


@pytest.mark.parametrize("theta,snr", [(0.0, 10.0), (17.3, 0.0), (-52.0, -5.0)])
def test_crb_single_source_closed_form(theta, snr):
    M, T = 7, 30
    p, s2 = 1.0, 10.0 ** (-snr / 10.0)
    dphi = np.pi * np.cos(np.deg2rad(theta))
    closed = s2 / (2 * T) * (s2 + M * p) / (M * p**2 * dphi**2 * M * (M**2 - 1) / 12)
    got = crb_matrix(ArrayGeometry(M), [theta], T, snr)[0, 0]
    assert abs(got - closed) / closed < 1e-8


def test_crb_noiseless_is_zero_and_needs_fewer_sources_than_sensors():
    geo = ArrayGeometry(3)
    assert stochastic_crb(Scenario(geo, (10.0,), 5, np.inf)) == 0.0
    with pytest.raises(ContractError):
        crb_matrix(geo, [-40.0, 0.0, 40.0], 5, 10.0)


def test_crb_curve_flat_across_grid_interval():
    cfg = SweepConfig(snr_db=(10.0, 0.0), grid_interval=(1.0, 4.0, 10.0), trials=20)
    recs = crb_curve(cfg)
    assert len(recs) == 6
    for snr in (10.0, 0.0):
        vals = {r["crb_deg"] for r in recs if r["snr_db"] == snr}
        assert len(vals) == 1


# ---- config ----------------------------------------------------------------------

def test_parse_config_reads_every_key():
    cfg = parse_config(SMALL + "spacing = 0.4\ntol_delta = 1e-5\nworkers = 2\noutput = out/x  # prefix\n")
    assert cfg.geometry == ArrayGeometry(5, 0.4)
    assert cfg.intervals == ((-30.0, -20.0), (0.0, 10.0))
    assert cfg.methods == ("root-sbl", "ongrid-sbl")
    assert (cfg.trials, cfg.master_seed, cfg.max_iters, cfg.workers) == (3, 7, 30, 2)
    assert cfg.tol_delta == 1e-5 and cfg.output == "out/x"
    assert cfg.source_count == 2


@pytest.mark.parametrize("text", [
    "bogus = 1",
    "sensors 7",
    "trials = many",
    "intervals = -10:0, -5:5",
    "methods = esprit",
    "sensors = 2",
    "spacing = 0.7",
    "grid_interval = 45",
    "eta = 0",
    "trials = 0",
])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


# ---- sweep --------------------------------------------------------------------------

def test_trial_seed_is_stable_and_distinct():
    assert trial_seed(2016, 0) == trial_seed(2016, 0)
    assert len({trial_seed(2016, n) for n in range(100)}) == 100
    assert trial_seed(2016, 0) != trial_seed(2017, 0)


def test_rows_share_random_numbers_across_methods():
    rows = run_monte_carlo(parse_config(SMALL))
    by_method = {}
    for r in rows:
        by_method.setdefault(r.method, []).append((r.trial, r.seed, r.true_doas))
    assert by_method["root-sbl"] == by_method["ongrid-sbl"]
    assert [r.sort_key() for r in rows] == sorted(r.sort_key() for r in rows)


def test_rows_csv_identical_across_reruns_and_workers(tmp_path):
    cfg = parse_config(SMALL)
    a = write_outputs(run_monte_carlo(cfg, workers=1), tmp_path / "a")
    b = write_outputs(run_monte_carlo(cfg, workers=2), tmp_path / "b")
    assert a["rows"].read_bytes() == b["rows"].read_bytes()
    with open(a["rows"]) as fh:
        header = next(csv.reader(fh))
    assert header[:5] == ["method", "snr_db", "grid_interval", "eta", "trial"]
    assert "elapsed" in a["timing"].read_text().splitlines()[0]


def test_failed_trial_is_recorded_and_excluded(monkeypatch):
    calls = {"n": 0}
    real = estimators.ESTIMATORS["root-sbl"]

    def flaky(Y, cfg):
        calls["n"] += 1
        if calls["n"] == 2:
            raise NumericalError("synthetic failure")
        return real(Y, cfg)

    monkeypatch.setitem(estimators.ESTIMATORS, "root-sbl", flaky)
    cfg = parse_config(SMALL.replace("methods = root-sbl, ongrid-sbl", "methods = root-sbl"))
    rows = run_monte_carlo(cfg)
    failed = [r for r in rows if r.error]
    assert len(rows) == 3 and len(failed) == 1
    assert failed[0].error == "NumericalError" and np.isnan(failed[0].rmse)
    (summary,) = summarize(rows)
    assert summary["excluded"] == 1 and summary["trials"] == 3
    ok = [r.rmse for r in rows if not r.error]
    assert summary["rmse"] == pytest.approx(np.sqrt(np.mean(np.square(ok))))


# ---- CLI ----------------------------------------------------------------------------

@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL + f"output = {tmp_path / 'run'}\n")
    return path


def test_cli_simulate_writes_csvs(small_config, tmp_path, capsys):
    assert main(["simulate", "--config", str(small_config)]) == 0
    for kind in ("rows", "timing", "summary"):
        assert (tmp_path / f"run_{kind}.csv").exists()
    assert "root-sbl" in capsys.readouterr().out


def test_cli_crb_prints_curve(small_config, tmp_path, capsys):
    out = tmp_path / "crb.csv"
    assert main(["crb", "--config", str(small_config), "--output", str(out)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "snr_db,grid_interval,crb_deg" and len(lines) == 2
    assert out.read_text().splitlines()[0] == "snr_db,grid_interval,crb_deg"


def test_cli_synth_then_estimate(tmp_path, capsys):
    snap = tmp_path / "y.txt"
    assert main(["synth", "--output", str(snap), "--doas", "-26", "2", "--snr", "inf", "--seed", "3"]) == 0
    assert main(["estimate", "--input", str(snap), "--r", "4", "--k", "2", "--method", "ongrid-sbl"]) == 0
    out = capsys.readouterr().out
    assert "doas: -26.0000 2.0000" in out
    assert "iterations:" in out and "elapsed:" in out


def test_cli_config_errors_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("sensors = seven\n")
    assert main(["simulate", "--config", str(bad)]) == 1
    assert main(["crb", "--config", str(tmp_path / "missing.cfg")]) == 1
    assert main(["estimate", "--input", str(tmp_path / "missing.txt"), "--r", "4", "--k", "1"]) == 1
    assert "error:" in capsys.readouterr().err


def test_cli_numerical_failure_exits_two(tmp_path, monkeypatch, capsys):
    snap = tmp_path / "y.txt"
    write_snapshots(synthesize_snapshots(Scenario(ArrayGeometry(5), (10.0,), 4, 10.0, 0)), snap)

    def broken(Y, cfg):
        raise NumericalError("posterior covariance not positive definite")

    monkeypatch.setitem(estimators.ESTIMATORS, "root-sbl", broken)
    assert main(["estimate", "--input", str(snap), "--r", "10", "--k", "1"]) == 2
    assert "numerical failure" in capsys.readouterr().err


def test_module_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "rootsbl", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "simulate" in proc.stdout and "estimate" in proc.stdout
