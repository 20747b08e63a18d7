"""Off-grid DOA estimation by sparse Bayesian learning with polynomial-rooted grid refinement."""

from rootsbl.array_model import (
    ArrayGeometry,
    Scenario,
    SnapshotMatrix,
    build_dictionary,
    read_snapshots,
    steering_derivative,
    steering_vector,
    synthesize_snapshots,
    write_snapshots,
)
from rootsbl.errors import ContractError, DegenerateError, NumericalError, RootSBLError
from rootsbl.estimators import (
    EstimationResult,
    EstimatorConfig,
    music_estimate,
    ongrid_sbl_estimate,
    pick_peaks,
    root_sbl_estimate,
)
from rootsbl.grid_refine import Grid, uniform_grid
from rootsbl.polyroot import find_roots
from rootsbl.sbl_core import EmConfig, Hyperparams, Posterior, run_em

__all__ = [
    "ArrayGeometry",
    "ContractError",
    "DegenerateError",
    "EmConfig",
    "EstimationResult",
    "EstimatorConfig",
    "Grid",
    "Hyperparams",
    "NumericalError",
    "Posterior",
    "RootSBLError",
    "Scenario",
    "SnapshotMatrix",
    "build_dictionary",
    "find_roots",
    "music_estimate",
    "ongrid_sbl_estimate",
    "pick_peaks",
    "read_snapshots",
    "root_sbl_estimate",
    "run_em",
    "steering_derivative",
    "steering_vector",
    "synthesize_snapshots",
    "uniform_grid",
    "write_snapshots",
]
