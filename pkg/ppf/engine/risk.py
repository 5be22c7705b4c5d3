"""
Limit-violation risk from output samples.

The violation probability is the violating fraction with a normal-approximation
95% interval. Its variance coefficient sqrt((1 - p) / (n p)) drives the MCS
stopping rule: an estimate is converged once the coefficient drops below the
threshold.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from gridflow.exceptions import BadParameter, NoSamples
from network.case_io import Network

from ._header import VARIANCE_COEFFICIENT_THRESHOLD, Z_95

logger = logging.getLogger(__name__)

DIRECTIONS = ("lower", "upper")


@dataclass(frozen=True)
class Limit:
    """``column`` indexes the sample matrix handed to risk_assess."""

    quantity: str
    column: int
    bound: float
    direction: str

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise BadParameter(f"limit direction must be one of {DIRECTIONS}, got '{self.direction}'")

    def depth(self, values: np.ndarray) -> np.ndarray:
        """Signed distance past the bound; positive means violated."""
        if self.direction == "lower":
            return self.bound - values
        return values - self.bound


@dataclass(frozen=True)
class ViolationRecord:
    quantity: str
    bound: float
    direction: str
    samples: int
    violations: int
    probability: float
    ci_low: float
    ci_high: float
    mean_depth: Optional[float]
    depth_ci_low: Optional[float]
    depth_ci_high: Optional[float]
    variance_coefficient: Optional[float]
    converged: bool
    estimable: bool
    required_samples: Optional[int]
    samples_to_converge: Optional[int]

    def to_dict(self) -> dict:
        return asdict(self)


def variance_coefficient(p: float, n: int) -> Optional[float]:
    if n < 1:
        raise NoSamples("variance coefficient needs at least one sample")
    if p <= 0:
        return None
    return math.sqrt((1.0 - p) / (n * p))


def required_samples(p: float, threshold: float = VARIANCE_COEFFICIENT_THRESHOLD) -> Optional[int]:
    """Sample count at which the coefficient for probability p reaches ``threshold``."""
    if p <= 0:
        return None
    return int(math.ceil((1.0 - p) / (p * threshold ** 2)))


def samples_to_converge(indicator, threshold: float = VARIANCE_COEFFICIENT_THRESHOLD) -> Optional[int]:
    """Smallest prefix length whose running coefficient is below ``threshold``."""
    hits = np.cumsum(np.asarray(indicator, dtype=bool))
    n = np.arange(1, hits.size + 1)
    p = hits / n
    with np.errstate(divide="ignore", invalid="ignore"):
        coeff = np.where(p > 0, np.sqrt((1.0 - p) / (n * p)), np.inf)
    below = np.flatnonzero(coeff < threshold)
    return int(below[0] + 1) if below.size else None


def _record(limit: Limit, values: np.ndarray, threshold: float) -> ViolationRecord:
    n = values.size
    depth = limit.depth(values)
    violated = depth > 0
    k = int(violated.sum())
    p = k / n
    half = Z_95 * math.sqrt(p * (1.0 - p) / n)

    mean_depth = depth_low = depth_high = None
    if k:
        d = depth[violated]
        mean_depth = float(d.mean())
        d_half = Z_95 * float(d.std(ddof=1)) / math.sqrt(k) if k > 1 else 0.0
        depth_low, depth_high = mean_depth - d_half, mean_depth + d_half

    coeff = variance_coefficient(p, n)
    return ViolationRecord(
        quantity=limit.quantity,
        bound=float(limit.bound),
        direction=limit.direction,
        samples=n,
        violations=k,
        probability=p,
        ci_low=max(0.0, p - half),
        ci_high=min(1.0, p + half),
        mean_depth=mean_depth,
        depth_ci_low=depth_low,
        depth_ci_high=depth_high,
        variance_coefficient=coeff,
        converged=coeff is not None and coeff < threshold,
        estimable=k > 0,
        required_samples=required_samples(p, threshold),
        samples_to_converge=samples_to_converge(violated, threshold),
    )


def risk_assess(
    samples,
    limits: Sequence[Limit],
    threshold: float = VARIANCE_COEFFICIENT_THRESHOLD,
) -> list[ViolationRecord]:
    """One record per limit over the rows of ``samples``."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    if samples.shape[0] == 0:
        raise NoSamples("risk assessment needs at least one sample")
    records = []
    for limit in limits:
        if not 0 <= limit.column < samples.shape[1]:
            raise BadParameter(f"limit on '{limit.quantity}' points at column {limit.column} of {samples.shape[1]}")
        records.append(_record(limit, samples[:, limit.column], threshold))
    flagged = sum(1 for r in records if r.estimable)
    logger.info(f"Assessed {len(records)} limits over {samples.shape[0]} samples, {flagged} with violations")
    return records


def records_frame(records: Sequence[ViolationRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.to_dict() for r in records], columns=list(ViolationRecord.__dataclass_fields__))


def variance_coefficient_scan(samples, counts: Sequence[int], epsilon: float = 1e-6) -> pd.DataFrame:
    """
    Variance coefficient of the sample-mean estimator, std / (sqrt(n) |mean|),
    over the first ``n`` rows for each count; aggregated as mean and max over
    dimensions whose |mean| exceeds ``epsilon``.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    rows = []
    for n in counts:
        n = int(n)
        if n < 2 or n > samples.shape[0]:
            raise BadParameter(f"count {n} outside [2, {samples.shape[0]}]")
        head = samples[:n]
        mean = head.mean(axis=0)
        keep = np.abs(mean) > epsilon
        if keep.any():
            coeff = head[:, keep].std(axis=0, ddof=1) / (math.sqrt(n) * np.abs(mean[keep]))
            rows.append((n, float(coeff.mean()), float(coeff.max())))
        else:
            rows.append((n, 0.0, 0.0))
    return pd.DataFrame(rows, columns=["count", "mean_coefficient", "max_coefficient"])


def limit_matrix(vm: np.ndarray, s_mva: np.ndarray) -> np.ndarray:
    """Columns that limits index: bus magnitudes then branch apparent power."""
    return np.hstack([np.atleast_2d(vm), np.atleast_2d(s_mva)])


def build_limits(
    net: Network,
    vm: np.ndarray,
    *,
    vm_lower: Optional[float] = None,
    vm_upper: Optional[float] = None,
    vm_lower_percentile: Optional[float] = None,
    branch_rate: bool = False,
) -> list[Limit]:
    """
    Limits over ``limit_matrix`` columns. Magnitude limits cover PQ buses only;
    a percentile bound is taken per bus from ``vm``. Branches with rateA 0 are
    unlimited.
    """
    ids = net.bus_ids
    limits = []
    for i in net.pq:
        qid = f"vm:{ids[i]}"
        if vm_lower_percentile is not None:
            limits.append(Limit(qid, int(i), float(np.percentile(vm[:, i], vm_lower_percentile)), "lower"))
        elif vm_lower is not None:
            limits.append(Limit(qid, int(i), float(vm_lower), "lower"))
        if vm_upper is not None:
            limits.append(Limit(qid, int(i), float(vm_upper), "upper"))
    if branch_rate:
        for k, rate in enumerate(net.rate_a):
            if rate > 0:
                limits.append(Limit(f"s:{k + 1}", net.n_bus + k, float(rate), "upper"))
    return limits
