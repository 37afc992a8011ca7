"""Accuracy metrics over Monte Carlo trials."""

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exceptions import DomainError, NotAdmissibleError

__all__ = ["hungarian_assign", "compute_rmse", "avg_source_number"]


def hungarian_assign(estimates, truth):
    """Match every true direction to a distinct estimate.

    The matching minimises the summed squared angular error. Surplus
    estimates stay unmatched.

    Parameters
    ----------
    estimates : array_like, shape (K_hat,)
    truth : array_like, shape (K,)

    Returns
    -------
    matched : ndarray, shape (K,)
        ``matched[k]`` is the estimate assigned to ``truth[k]``.
    cost : float
        Sum of squared errors of the matching, in squared degrees.

    Raises
    ------
    NotAdmissibleError
        If there are fewer estimates than true directions.
    """
    est = np.asarray(estimates, dtype=float).ravel()
    tru = np.asarray(truth, dtype=float).ravel()
    if tru.size == 0:
        raise DomainError("truth must contain at least one direction")
    if est.size < tru.size:
        raise NotAdmissibleError(f"{est.size} estimates cannot cover {tru.size} sources")
    cost = (tru[:, None] - est[None, :]) ** 2
    rows, cols = linear_sum_assignment(cost)
    matched = np.empty(tru.size)
    matched[rows] = est[cols]
    return matched, float(cost[rows, cols].sum())


def _estimates(trial):
    if hasattr(trial, "estimated_doas"):
        return trial.estimated_doas
    return trial


def compute_rmse(trials, truth):
    """Root mean square error over the trials that found enough sources.

    Parameters
    ----------
    trials : sequence
        TrialRecord objects or plain sequences of estimated directions. A
        record of a failed estimation carries no directions and is skipped.
    truth : array_like, shape (K,)

    Returns
    -------
    rmse : float
        ``nan`` when no trial is admitted.
    admitted : int
        Number of trials with at least ``K`` estimates.
    """
    truth = np.asarray(truth, dtype=float).ravel()
    total = 0.0
    admitted = 0
    for trial in trials:
        est = _estimates(trial)
        if est is None:
            continue
        try:
            _, cost = hungarian_assign(est, truth)
        except NotAdmissibleError:
            continue
        total += cost
        admitted += 1
    if admitted == 0:
        return float("nan"), 0
    return float(np.sqrt(total / (truth.size * admitted))), admitted


def avg_source_number(trials):
    """Mean estimated source number; failed trials count as zero.

    Accepts TrialRecord objects (``n_sources`` attribute) or plain integers.
    """
    counts = [getattr(t, "n_sources", t) for t in trials]
    if not counts:
        raise DomainError("at least one trial is required")
    return float(np.mean([0 if c is None else c for c in counts]))
