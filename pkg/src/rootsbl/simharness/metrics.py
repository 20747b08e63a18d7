import numpy as np
from scipy.optimize import linear_sum_assignment

from rootsbl.errors import ContractError


def matched_squared_errors(estimated, truth) -> np.ndarray:
    """Squared errors after the minimum-cost assignment of estimates to true angles."""
    est = np.asarray(estimated, dtype=float).ravel()
    tru = np.asarray(truth, dtype=float).ravel()
    if est.size != tru.size:
        raise ContractError(f"{est.size} estimates for {tru.size} true angles")
    cost = (est[:, None] - tru[None, :]) ** 2
    rows, cols = linear_sum_assignment(cost)
    return cost[rows, cols]


def rmse(estimated, truth) -> float:
    """Per-trial RMSE in degrees over matched pairs."""
    return float(np.sqrt(np.mean(matched_squared_errors(estimated, truth))))


def sweep_rmse(per_trial_rmse) -> float:
    """Aggregate RMSE over trials with equal source counts.

    Equals the square root of the mean matched squared error over all trials
    and sources. NaN entries (failed trials) are ignored.
    """
    r = np.asarray(per_trial_rmse, dtype=float)
    r = r[np.isfinite(r)]
    return float(np.sqrt(np.mean(r**2))) if r.size else float("nan")
