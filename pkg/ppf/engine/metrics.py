"""
Accuracy metrics between predicted and reference output samples (rows are
samples, columns are output dimensions).
"""
from __future__ import annotations

import logging

import numpy as np
from scipy.stats import wasserstein_distance

from gridflow.exceptions import AllTargetsNearZero, ShapeMismatch

from ._header import MAPE_EPSILON

logger = logging.getLogger(__name__)


def _pair(Yhat, Y) -> tuple[np.ndarray, np.ndarray]:
    Yhat = np.asarray(Yhat, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Yhat.ndim == 1:
        Yhat = Yhat[:, None]
    if Y.ndim == 1:
        Y = Y[:, None]
    if Yhat.shape != Y.shape:
        raise ShapeMismatch(f"prediction shape {Yhat.shape} does not match target shape {Y.shape}")
    return Yhat, Y


def armse(Yhat, Y) -> float:
    """Mean over columns of the per-column RMSE."""
    Yhat, Y = _pair(Yhat, Y)
    return float(np.mean(np.sqrt(np.mean((Yhat - Y) ** 2, axis=0))))


def mape(Yhat, Y, epsilon: float = MAPE_EPSILON, *, return_excluded: bool = False):
    """
    Per-column mean absolute percentage error. Entries with |Y| < epsilon are
    excluded; a column with no usable entries is NaN.
    """
    Yhat, Y = _pair(Yhat, Y)
    usable = np.abs(Y) >= epsilon
    if not usable.any():
        raise AllTargetsNearZero(f"every target is below {epsilon:g} in magnitude")
    ratio = np.where(usable, np.abs(Yhat - Y) / np.where(usable, np.abs(Y), 1.0), 0.0)
    counts = usable.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = 100.0 * ratio.sum(axis=0) / counts
    out = np.where(counts > 0, out, np.nan)
    excluded = int((~usable).sum())
    if excluded:
        logger.warning(f"MAPE excluded {excluded} near-zero target entries")
    if return_excluded:
        return out, excluded
    return out


def wasserstein_1d(a, b) -> float:
    """W1 between two empirical samples; sorted differences when lengths match."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ShapeMismatch("W1 needs non-empty samples")
    if a.size == b.size:
        return float(np.mean(np.abs(np.sort(a) - np.sort(b))))
    return float(wasserstein_distance(a, b))


def awd(Yhat, Y) -> float:
    """Mean over columns of the 1-D W1 distance between the column samples."""
    Yhat, Y = _pair(Yhat, Y)
    return float(np.mean(np.abs(np.sort(Yhat, axis=0) - np.sort(Y, axis=0))))
