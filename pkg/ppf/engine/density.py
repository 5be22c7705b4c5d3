from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import gaussian_kde

from gridflow.exceptions import DegenerateSamples

from ._header import KDE_PAD_BANDWIDTHS, KDE_POINTS


@dataclass(frozen=True, eq=False)
class KdeCurve:
    name: str
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.grid))


def _samples(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2 or np.all(x == x[0]):
        raise DegenerateSamples(float(x[0]) if x.size else float("nan"))
    return x


def silverman_bandwidth(samples) -> float:
    """0.9 * min(std, IQR / 1.34) * n^(-1/5); the IQR term is skipped when it is zero."""
    x = _samples(samples)
    sigma = np.std(x, ddof=1)
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sigma, (q75 - q25) / 1.34) if q75 > q25 else sigma
    return float(0.9 * spread * x.size ** (-0.2))


def kde_grid(samples, points: int = KDE_POINTS, pad: float = KDE_PAD_BANDWIDTHS) -> np.ndarray:
    x = _samples(samples)
    h = silverman_bandwidth(x)
    return np.linspace(x.min() - pad * h, x.max() + pad * h, points)


def kde(samples, grid) -> np.ndarray:
    """Gaussian-kernel density of ``samples`` evaluated on ``grid``."""
    x = _samples(samples)
    h = silverman_bandwidth(x)
    estimator = gaussian_kde(x, bw_method=h / np.std(x, ddof=1))
    return estimator(np.asarray(grid, dtype=float))


def kde_curve(name: str, samples, points: int = KDE_POINTS) -> KdeCurve:
    grid = kde_grid(samples, points)
    return KdeCurve(name=name, grid=grid, density=kde(samples, grid), bandwidth=silverman_bandwidth(samples))
