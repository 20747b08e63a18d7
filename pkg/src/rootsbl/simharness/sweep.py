"""
Monte Carlo sweep runner
========================

Every (method, snr, grid interval, eta, trial) cell is an independent task.
The data of trial ``n`` depend only on ``(master_seed, n)``, so all methods,
SNRs, grid intervals and eta values see the same DOAs and the same
normalized source and noise draws. Rows are sorted before output, which
makes the rows CSV a pure function of the configuration.
"""

from __future__ import annotations

import csv
import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from rootsbl.array_model import Scenario, synthesize_snapshots
from rootsbl.estimators import ESTIMATORS, EstimatorConfig
from rootsbl.sbl_core import EmConfig
from rootsbl.simharness.config import SweepConfig
from rootsbl.simharness.metrics import rmse, sweep_rmse

logger = logging.getLogger(__name__)

ROW_FIELDS = (
    "method", "snr_db", "grid_interval", "eta", "trial", "seed",
    "true_doas", "est_doas", "rmse", "iterations", "error",
)
TIMING_FIELDS = ("method", "snr_db", "grid_interval", "eta", "trial", "elapsed")
SUMMARY_FIELDS = (
    "method", "snr_db", "grid_interval", "eta", "trials", "excluded",
    "rmse", "median_elapsed", "mean_iterations",
)


@dataclass(frozen=True)
class ResultRow:
    method: str
    snr_db: float
    grid_interval: float
    eta: int
    trial: int
    seed: int
    true_doas: tuple
    est_doas: tuple
    rmse: float
    elapsed: float
    iterations: int
    error: str = ""

    def sort_key(self):
        return (self.method, self.snr_db, self.grid_interval, self.eta, self.trial)


def trial_seed(master_seed: int, trial: int) -> int:
    """64-bit seed for one trial, split off ``master_seed``."""
    state = np.random.SeedSequence([int(master_seed) & (2**64 - 1), int(trial)]).generate_state(1, np.uint64)
    return int(state[0])


def draw_doas(seed: int, intervals) -> tuple:
    """One uniform draw from each ``(lo, hi)`` interval, on a stream separate from synthesis."""
    rng = np.random.default_rng([seed, 1])
    return tuple(float(rng.uniform(lo, hi)) for lo, hi in intervals)


def _run_cell(args) -> ResultRow:
    cfg, method, snr, r, eta, trial = args
    seed = trial_seed(cfg.master_seed, trial)
    doas = draw_doas(seed, cfg.intervals)
    Y = synthesize_snapshots(Scenario(cfg.geometry, doas, cfg.snapshots, snr, seed))
    est_cfg = EstimatorConfig(
        cfg.geometry, r, cfg.source_count,
        EmConfig(max_iters=cfg.max_iters, tol_delta=cfg.tol_delta, eta=eta), eta=eta,
    )
    try:
        res = ESTIMATORS[method](Y, est_cfg)
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        logger.warning("%s failed on trial %d (snr=%s, r=%s): %s", method, trial, snr, r, exc)
        return ResultRow(method, snr, r, eta, trial, seed, doas, (), float("nan"), float("nan"), 0,
                         type(exc).__name__)
    est = tuple(float(x) for x in res.doas)
    return ResultRow(method, snr, r, eta, trial, seed, doas, est, rmse(est, doas), res.elapsed, res.iterations)


def cells(cfg: SweepConfig):
    """Tasks in trial-major order.

    Consecutive tasks cycle through the cells, so slow drift in machine load
    affects every cell alike and median times stay comparable.
    """
    for trial, method, snr, r, eta in itertools.product(
        range(cfg.trials), cfg.methods, cfg.snr_db, cfg.grid_interval, cfg.eta
    ):
        yield (cfg, method, snr, r, eta, trial)


def run_monte_carlo(cfg: SweepConfig, workers: int | None = None) -> list[ResultRow]:
    """Run every cell of the sweep and return rows in canonical order."""
    workers = cfg.workers if workers is None else workers
    tasks = list(cells(cfg))
    if workers <= 1:
        rows = [_run_cell(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_cell, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
    return sorted(rows, key=ResultRow.sort_key)


def summarize(rows) -> list[dict]:
    """Sweep-level RMSE, failure count, median time and mean iterations per cell."""
    groups: dict = {}
    for row in rows:
        groups.setdefault(row.sort_key()[:4], []).append(row)
    out = []
    for key in sorted(groups):
        grp = groups[key]
        ok = [r for r in grp if not r.error]
        out.append({
            "method": key[0], "snr_db": key[1], "grid_interval": key[2], "eta": key[3],
            "trials": len(grp), "excluded": len(grp) - len(ok),
            "rmse": sweep_rmse([r.rmse for r in ok]),
            "median_elapsed": float(np.median([r.elapsed for r in ok])) if ok else float("nan"),
            "mean_iterations": float(np.mean([r.iterations for r in ok])) if ok else float("nan"),
        })
    return out


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ";".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ROW_FIELDS)
        for row in rows:
            w.writerow([_fmt(getattr(row, f)) for f in ROW_FIELDS])


def write_timing(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMING_FIELDS)
        for row in rows:
            w.writerow([_fmt(getattr(row, f)) for f in TIMING_FIELDS])


def write_table(records, fields, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for rec in records:
            w.writerow({k: _fmt(v) for k, v in rec.items()})


def write_outputs(rows, output) -> dict:
    """Write ``<output>_rows.csv``, ``<output>_timing.csv`` and ``<output>_summary.csv``.

    Wall-clock times live in the timing file so the rows file stays
    byte-identical across reruns.
    """
    base = Path(output)
    base.parent.mkdir(parents=True, exist_ok=True)
    paths = {
        "rows": base.with_name(base.name + "_rows.csv"),
        "timing": base.with_name(base.name + "_timing.csv"),
        "summary": base.with_name(base.name + "_summary.csv"),
    }
    write_rows(rows, paths["rows"])
    write_timing(rows, paths["timing"])
    write_table(summarize(rows), SUMMARY_FIELDS, paths["summary"])
    return paths
