"""Monte Carlo sweeps, error metrics, Cramer-Rao reference and the command-line interface."""

from rootsbl.simharness.config import ConfigError, SweepConfig, load_config, parse_config
from rootsbl.simharness.crb import crb_curve, stochastic_crb
from rootsbl.simharness.metrics import matched_squared_errors, rmse, sweep_rmse
from rootsbl.simharness.sweep import (
    ResultRow,
    draw_doas,
    run_monte_carlo,
    summarize,
    trial_seed,
    write_outputs,
)

__all__ = [
    "ConfigError",
    "ResultRow",
    "SweepConfig",
    "crb_curve",
    "draw_doas",
    "load_config",
    "matched_squared_errors",
    "parse_config",
    "rmse",
    "run_monte_carlo",
    "stochastic_crb",
    "summarize",
    "sweep_rmse",
    "trial_seed",
    "write_outputs",
]
