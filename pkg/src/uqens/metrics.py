"""Scoring and comparison utilities for probabilistic regression outputs."""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "gaussian_nll",
    "rmse",
    "CurvePoint",
    "confidence_error_curve",
    "default_thresholds",
    "aggregate_ci",
    "rank_methods",
    "MetricsReport",
]


def gaussian_nll(est, y):
    """Mean negative log-likelihood under per-point Gaussians N(mean, total_var)."""
    y = np.asarray(y, dtype=float)
    var = np.asarray(est.total_var, dtype=float)
    mean = np.asarray(est.mean, dtype=float)
    if y.shape != mean.shape:
        raise ValueError("prediction/target length mismatch")
    if np.any(var <= 0):
        raise ValueError("total variance must be strictly positive")
    resid = y - mean
    return float(np.mean(0.5 * np.log(2.0 * np.pi * var) + resid * resid / (2.0 * var)))


def rmse(y_pred, y):
    y_pred = np.asarray(y_pred, dtype=float)
    y = np.asarray(y, dtype=float)
    if y_pred.shape != y.shape:
        raise ValueError("prediction/target length mismatch")
    if y.size == 0:
        raise ValueError("rmse of empty vectors")
    diff = y_pred - y
    return float(np.sqrt(np.mean(diff * diff)))


@dataclass(frozen=True)
class CurvePoint:
    threshold: float
    rmse: float  # nan when no point clears the threshold
    coverage: float


def confidence_error_curve(est, y, thresholds):
    """RMSE restricted to points whose predicted precision exceeds each
    threshold, with the retained fraction. Empty subsets become gap points
    (rmse nan, coverage 0) rather than errors."""
    y = np.asarray(y, dtype=float)
    thresholds = np.asarray(thresholds, dtype=float)
    if np.any(np.diff(thresholds) < 0):
        raise ValueError("thresholds must be sorted ascending")
    precision = 1.0 / np.asarray(est.total_var, dtype=float)
    mean = np.asarray(est.mean, dtype=float)
    out = []
    for tau in thresholds:
        mask = precision > tau
        cov = float(np.mean(mask)) if y.size else 0.0
        if not np.any(mask):
            out.append(CurvePoint(float(tau), float("nan"), 0.0))
        else:
            out.append(CurvePoint(float(tau), rmse(mean[mask], y[mask]), cov))
    return out


def default_thresholds(precisions, count=20):
    """Log-spaced grid between the 5th and 95th precision percentiles."""
    precisions = np.asarray(precisions, dtype=float)
    if np.any(precisions <= 0):
        raise ValueError("precisions must be positive")
    lo, hi = np.percentile(precisions, [5.0, 95.0])
    return np.geomspace(lo, hi, count)


def aggregate_ci(scores):
    """Mean and 95% normal-approximation half-width over independent repeats."""
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 1 or scores.size < 2:
        raise ValueError("need at least two scores")
    mean = float(np.mean(scores))
    half = 1.96 * float(np.std(scores, ddof=1)) / math.sqrt(scores.size)
    return mean, half


def rank_methods(stats):
    """Dense ranks from (mean, half-width) pairs; CI overlap ties.

    Intervals are closed; the tie relation is the transitive closure of
    pairwise overlap, so a chain of overlapping intervals shares one rank.
    Returns ranks aligned with the input order.
    """
    stats = [(float(m), float(h)) for m, h in stats]
    if len(stats) < 2:
        raise ValueError("need at least two methods to rank")
    for _, h in stats:
        if h < 0:
            raise ValueError("half-widths must be >= 0")
    order = sorted(range(len(stats)), key=lambda i: stats[i][0])
    ranks = [0] * len(stats)
    rank = 0
    group_hi = -math.inf
    for i in order:
        mean, half = stats[i]
        if mean - half > group_hi:
            rank += 1
            group_hi = mean + half
        else:
            group_hi = max(group_hi, mean + half)
        ranks[i] = rank
    return ranks


@dataclass(frozen=True)
class MetricsReport:
    """Aggregated scores for one (dataset, method) cell."""

    dataset: str
    method: str
    nll_mean: float
    nll_half_width: float
    rmse_mean: float
    rmse_half_width: float
    curve: tuple  # CurvePoint aggregated over seeds on a common grid
    seeds: tuple
