"""
Stochastic injection scenarios.

Every random quantity consumes one column of a uniform matrix, allocated in
a fixed order (Gaussian groups, Weibull units, Beta units, outage units). The
matrix comes from a seeded generator (``mc``) or an unscrambled Halton
sequence (``qmc``); both go through the same inverse-CDF transforms.
"""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Union

import numpy as np
from scipy.stats import qmc

from analytics.computation import (
    Beta,
    StdNormal,
    Weibull,
    cholesky,
    injection_vector,
    make_rng,
    nearest_psd,
    transform_uniform,
)
from gridflow.exceptions import BadSpec, CovarianceNotPSD, NotPositiveDefinite
from network.case_io import Network

from ._header import GAUSSIAN_QUANTITIES, HALTON_SKIP, SAMPLERS

logger = logging.getLogger(__name__)

BusSelector = Union[str, tuple[int, ...]]


@dataclass(frozen=True)
class GaussianGroup:
    """
    Correlated Gaussian injections with mean equal to the base value and
    standard deviation ``std_ratio * |mean|``.

    ``quantity`` is "generation" (P at each bus) or "load" (P and Q demand at
    each bus, same-bus P/Q pairs correlated by ``pq_correlation``). ``buses``
    is "pv", "loads" (non-zero demand) or a tuple of external bus ids.
    """

    name: str
    quantity: str
    buses: BusSelector
    std_ratio: float
    correlation: float = 0.0
    pq_correlation: float = 0.8


@dataclass(frozen=True)
class WeibullUnit:
    bus: int
    k: float
    lam: float
    scale: float  # MW per unit of the Weibull variate


@dataclass(frozen=True)
class BetaUnit:
    bus: int
    alpha: float
    beta: float
    capacity: float  # MW


@dataclass(frozen=True)
class OutageUnit:
    bus: int
    probability: float


@dataclass(frozen=True)
class ScenarioSpec:
    gaussian_groups: tuple[GaussianGroup, ...] = ()
    weibull_units: tuple[WeibullUnit, ...] = ()
    beta_units: tuple[BetaUnit, ...] = ()
    outage_units: tuple[OutageUnit, ...] = ()
    sampler: str = "mc"
    seed: int = 0
    samples: int = 1000
    halton_skip: int = HALTON_SKIP
    purpose: str = field(default="scenario", compare=False)

    def __post_init__(self):
        if self.sampler not in SAMPLERS:
            raise BadSpec(f"sampler must be one of {SAMPLERS}, got '{self.sampler}'")
        if self.samples < 1:
            raise BadSpec(f"samples must be >= 1, got {self.samples}")
        for group in self.gaussian_groups:
            if group.quantity not in GAUSSIAN_QUANTITIES:
                raise BadSpec(f"group '{group.name}': quantity must be one of {GAUSSIAN_QUANTITIES}")
            if group.std_ratio < 0:
                raise BadSpec(f"group '{group.name}': std_ratio must be >= 0")
            if not (-1 <= group.correlation <= 1 and -1 <= group.pq_correlation <= 1):
                raise BadSpec(f"group '{group.name}': correlations must lie in [-1, 1]")
        for unit in self.weibull_units:
            if unit.k <= 0 or unit.lam <= 0 or unit.scale < 0:
                raise BadSpec(f"Weibull unit at bus {unit.bus}: needs k, lambda > 0 and scale >= 0")
        for unit in self.beta_units:
            if unit.alpha <= 0 or unit.beta <= 0 or unit.capacity < 0:
                raise BadSpec(f"Beta unit at bus {unit.bus}: needs alpha, beta > 0 and capacity >= 0")
        for unit in self.outage_units:
            if not 0 <= unit.probability <= 1:
                raise BadSpec(f"outage unit at bus {unit.bus}: probability must lie in [0, 1]")

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("purpose")
        return out

    def digest(self, case_text: str = "") -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, default=list) + "\n" + case_text
        return hashlib.sha1(payload.encode("utf-8")).hexdigest()


def _bus_indices(net: Network, selector: BusSelector, where: str) -> np.ndarray:
    if selector == "pv":
        return np.asarray(net.pv)
    if selector == "loads":
        return np.flatnonzero((net.pd != 0) | (net.qd != 0))
    if isinstance(selector, str):
        raise BadSpec(f"{where}: unknown bus selector '{selector}'")
    indices = []
    for bus_id in selector:
        if bus_id not in net.bus_index:
            raise BadSpec(f"{where}: bus {bus_id} is not in the network")
        indices.append(net.bus_index[bus_id])
    return np.array(indices, dtype=np.int64)


def correlation_matrix(group: GaussianGroup, n_buses: int) -> np.ndarray:
    """Equicorrelated across buses; for load groups variables are [P_1..P_k, Q_1..Q_k]."""
    if group.quantity == "generation":
        C = np.full((n_buses, n_buses), group.correlation)
    else:
        same_bus = np.tile(np.eye(n_buses), (2, 2)).astype(bool)
        C = np.where(same_bus, group.pq_correlation, group.correlation)
    np.fill_diagonal(C, 1.0)
    return C


def correlation_factor(C: np.ndarray) -> np.ndarray:
    """Cholesky factor of a correlation matrix, repaired to the nearest PSD matrix if needed."""
    try:
        return cholesky(C)
    except NotPositiveDefinite:
        logger.warning("Correlation matrix is not positive definite; clipping eigenvalues")
    try:
        return cholesky(nearest_psd(C))
    except NotPositiveDefinite as e:
        raise CovarianceNotPSD(f"correlation matrix cannot be repaired (row {e.row})") from e


def _layout(net: Network, spec: ScenarioSpec):
    groups = []
    for group in spec.gaussian_groups:
        buses = _bus_indices(net, group.buses, f"group '{group.name}'")
        width = len(buses) * (2 if group.quantity == "load" else 1)
        groups.append((group, buses, width))

    def units(items, kind):
        return [(unit, _bus_indices(net, (unit.bus,), f"{kind} unit")[0]) for unit in items]

    return (
        groups,
        units(spec.weibull_units, "Weibull"),
        units(spec.beta_units, "Beta"),
        units(spec.outage_units, "outage"),
    )


def uniform_matrix(spec: ScenarioSpec, n: int, dims: int) -> np.ndarray:
    if dims == 0:
        return np.empty((n, 0))
    if spec.sampler == "qmc":
        engine = qmc.Halton(d=dims, scramble=False)
        engine.fast_forward(spec.halton_skip)
        return engine.random(n)
    return make_rng(spec.seed, spec.purpose).random((n, dims))


def sample_injections(net: Network, spec: ScenarioSpec) -> np.ndarray:
    """Draw ``spec.samples`` injection vectors x = [P_g; P_l; Q_l] (rows)."""
    n = spec.samples
    groups, weibull_units, beta_units, outage_units = _layout(net, spec)
    dims = sum(width for _, _, width in groups) + len(weibull_units) + len(beta_units) + len(outage_units)
    U = uniform_matrix(spec, n, dims)

    gen_p = np.tile(net.pg, (n, 1))
    gen_q = np.tile(net.qg, (n, 1))
    load_p = np.tile(net.pd, (n, 1))
    load_q = np.tile(net.qd, (n, 1))

    col = 0
    for group, buses, width in groups:
        if width == 0:
            continue
        z = transform_uniform(U[:, col:col + width], StdNormal())
        col += width
        L = correlation_factor(correlation_matrix(group, len(buses)))
        if group.quantity == "generation":
            mean = net.pg[buses]
        else:
            mean = np.concatenate([net.pd[buses], net.qd[buses]])
        values = mean + group.std_ratio * np.abs(mean) * (z @ L.T)
        if group.quantity == "generation":
            gen_p[:, buses] = values
        else:
            load_p[:, buses] = values[:, :len(buses)]
            load_q[:, buses] = values[:, len(buses):]

    renewable = np.zeros_like(gen_p)
    for unit, bus in weibull_units:
        w = transform_uniform(U[:, col], Weibull(unit.k, unit.lam))
        renewable[:, bus] += unit.scale * w / net.base_mva
        col += 1
    for unit, bus in beta_units:
        b = transform_uniform(U[:, col], Beta(unit.alpha, unit.beta))
        renewable[:, bus] += unit.capacity * b / net.base_mva
        col += 1
    for unit, bus in outage_units:
        survive = U[:, col] >= unit.probability
        gen_p[:, bus] *= survive
        gen_q[:, bus] *= survive
        col += 1

    P = gen_p + renewable - load_p
    Q = gen_q - load_q
    logger.info(f"Sampled {n} injection scenarios ({spec.sampler}, {dims} random dimensions)")
    return injection_vector(net, P, Q)
