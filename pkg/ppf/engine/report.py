"""
PPF report assembly.

Quantity ids name one scalar per sample: ``va:<bus>`` (rad), ``vm:<bus>``
(p.u.) for external bus ids, and ``p:<k>``, ``q:<k>`` (p.u., from end),
``s:<k>`` (MVA) for the k-th in-service branch counted from 1.
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from gridflow.exceptions import BadParameter, DegenerateSamples, ShapeMismatch
from network.case_io import Network

from ._header import CSV_FLOAT_FORMAT, KDE_POINTS, MAPE_EPSILON
from .density import KdeCurve, kde_curve
from .mcs import McsResult
from .metrics import armse, awd, mape
from .risk import ViolationRecord, variance_coefficient_scan

logger = logging.getLogger(__name__)

QUANTITY_KINDS = ("va", "vm", "p", "q", "s")


def quantity_values(net: Network, result: McsResult, quantity_id: str) -> np.ndarray:
    kind, _, key = quantity_id.partition(":")
    if kind not in QUANTITY_KINDS or not key.lstrip("-").isdigit():
        raise BadParameter(f"unknown quantity id '{quantity_id}'")
    key = int(key)
    if kind in ("va", "vm"):
        if key not in net.bus_index:
            raise BadParameter(f"quantity '{quantity_id}': bus {key} is not in the network")
        column = net.bus_index[key]
        return (result.theta if kind == "va" else result.vm)[:, column]
    if not 1 <= key <= len(net.branches):
        raise BadParameter(f"quantity '{quantity_id}': branch {key} outside 1..{len(net.branches)}")
    source = {"p": result.flows.pf, "q": result.flows.qf, "s": result.flows.s_mva}[kind]
    return source[:, key - 1]


def _angle_width(net: Network) -> int:
    return net.n_pv + net.n_pq


@dataclass(eq=False)
class PpfReport:
    solver: str
    samples: int
    dropped: int
    moments: dict
    kde: list[dict]
    variance_coefficients: dict[str, pd.DataFrame]
    violations: list[ViolationRecord] = field(default_factory=list)
    reference: Optional[str] = None
    armse_angle: Optional[float] = None
    armse_vm: Optional[float] = None
    mape: Optional[list[float]] = None
    mape_excluded: int = 0
    awd_angle: Optional[float] = None
    awd_vm: Optional[float] = None
    awd_branch: Optional[dict] = None
    armse_branch: Optional[dict] = None
    paired: list[dict] = field(default_factory=list)
    curves: list[KdeCurve] = field(default_factory=list)
    seconds: float = 0.0
    reference_seconds: Optional[float] = None

    @property
    def acceleration_ratio(self) -> Optional[float]:
        if self.reference_seconds is None or self.seconds <= 0:
            return None
        return self.reference_seconds / self.seconds

    def to_dict(self) -> dict:
        return {
            "solver": self.solver,
            "reference": self.reference,
            "samples": self.samples,
            "dropped": self.dropped,
            "armse_angle": self.armse_angle,
            "armse_vm": self.armse_vm,
            "mape": self.mape,
            "mape_excluded": self.mape_excluded,
            "awd_angle": self.awd_angle,
            "awd_vm": self.awd_vm,
            "awd_branch": self.awd_branch,
            "armse_branch": self.armse_branch,
            "moments": self.moments,
            "kde": self.kde,
            "violations": [r.to_dict() for r in self.violations],
            "paired": self.paired,
            "variance_coefficients": {
                name: frame.to_dict(orient="records") for name, frame in self.variance_coefficients.items()
            },
        }


def _moments(net: Network, result: McsResult) -> dict:
    ids = net.bus_ids
    theta_mean, theta_std = result.theta.mean(axis=0), result.theta.std(axis=0)
    vm_mean, vm_std = result.vm.mean(axis=0), result.vm.std(axis=0)
    s_mean, s_std = result.flows.s_mva.mean(axis=0), result.flows.s_mva.std(axis=0)
    out = {}
    for i, bus_id in enumerate(ids):
        out[f"va:{bus_id}"] = {"mean": float(theta_mean[i]), "std": float(theta_std[i])}
        out[f"vm:{bus_id}"] = {"mean": float(vm_mean[i]), "std": float(vm_std[i])}
    for k in range(s_mean.size):
        out[f"s:{k + 1}"] = {"mean": float(s_mean[k]), "std": float(s_std[k])}
    return out


def _kde_entries(net: Network, result: McsResult, quantities: Sequence[str], points: int):
    entries, curves = [], []
    for qid in quantities:
        values = quantity_values(net, result, qid)
        try:
            curve = kde_curve(qid, values, points)
        except DegenerateSamples as e:
            entries.append({"name": qid, "point_mass": e.value})
            continue
        curves.append(curve)
        entries.append({
            "name": qid,
            "point_mass": None,
            "bandwidth": curve.bandwidth,
            "points": int(curve.grid.size),
            "integral": curve.integral(),
        })
    return entries, curves


def _variance_tables(net: Network, result: McsResult, counts: Sequence[int]) -> dict[str, pd.DataFrame]:
    usable = [int(c) for c in counts if 2 <= int(c) <= result.samples]
    if len(usable) < len(counts):
        logger.warning(f"Variance scan skips counts outside [2, {result.samples}]")
    na = _angle_width(net)
    return {
        "angle": variance_coefficient_scan(result.Y[:, :na], usable),
        "vm": variance_coefficient_scan(result.Y[:, na:], usable),
        "s": variance_coefficient_scan(result.flows.s_mva, usable),
    }


def build_report(
    net: Network,
    result: McsResult,
    *,
    reference: Optional[McsResult] = None,
    kde_quantities: Sequence[str] = (),
    kde_points: int = KDE_POINTS,
    variance_counts: Sequence[int] = (),
    mape_epsilon: float = MAPE_EPSILON,
    violations: Sequence[ViolationRecord] = (),
    reference_violations: Sequence[ViolationRecord] = (),
) -> PpfReport:
    """Statistics of ``result``; accuracy metrics are filled when a paired ``reference`` is given."""
    entries, curves = _kde_entries(net, result, kde_quantities, kde_points)
    report = PpfReport(
        solver=result.solver,
        samples=result.samples,
        dropped=int(len(result.dropped)),
        moments=_moments(net, result),
        kde=entries,
        curves=curves,
        variance_coefficients=_variance_tables(net, result, variance_counts),
        violations=list(violations),
        seconds=result.seconds,
    )
    if reference is None:
        return report

    if reference.Y.shape != result.Y.shape:
        raise ShapeMismatch(f"reference has {reference.Y.shape}, result has {result.Y.shape}")
    na = _angle_width(net)
    Yhat, Y = result.Y, reference.Y
    per_dim, excluded = mape(Yhat, Y, mape_epsilon, return_excluded=True)
    report.reference = reference.solver
    report.reference_seconds = reference.seconds
    report.armse_angle = armse(Yhat[:, :na], Y[:, :na])
    report.armse_vm = armse(Yhat[:, na:], Y[:, na:])
    report.awd_angle = awd(Yhat[:, :na], Y[:, :na])
    report.awd_vm = awd(Yhat[:, na:], Y[:, na:])
    report.mape = [None if np.isnan(v) else float(v) for v in per_dim]
    report.mape_excluded = excluded
    flows, ref_flows = result.flows, reference.flows
    report.awd_branch = {
        "p": awd(flows.pf, ref_flows.pf),
        "q": awd(flows.qf, ref_flows.qf),
        "s_mva": awd(flows.s_mva, ref_flows.s_mva),
    }
    report.armse_branch = {
        "p": armse(flows.pf, ref_flows.pf),
        "q": armse(flows.qf, ref_flows.qf),
        "s_mva": armse(flows.s_mva, ref_flows.s_mva),
    }
    report.paired = paired_deltas(violations, reference_violations)
    logger.info(
        f"{result.solver} vs {reference.solver}: ARMSE angle {report.armse_angle:.3e}, vm {report.armse_vm:.3e}"
    )
    return report


def paired_deltas(records: Sequence[ViolationRecord], reference: Sequence[ViolationRecord]) -> list[dict]:
    """Per-limit probability difference and whether the mean depth lies inside the reference CI."""
    by_key = {(r.quantity, r.direction, r.bound): r for r in reference}
    out = []
    for r in records:
        ref = by_key.get((r.quantity, r.direction, r.bound))
        if ref is None:
            continue
        depth_inside = None
        if r.mean_depth is not None and ref.depth_ci_low is not None:
            depth_inside = ref.depth_ci_low <= r.mean_depth <= ref.depth_ci_high
        out.append({
            "quantity": r.quantity,
            "direction": r.direction,
            "bound": r.bound,
            "probability": r.probability,
            "reference_probability": ref.probability,
            "abs_difference": abs(r.probability - ref.probability),
            "depth_inside_reference_ci": depth_inside,
        })
    return out


def _dump_json(payload: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True, allow_nan=False)
        f.write("\n")


def write_timing(path: str, seconds: float, reference_seconds: Optional[float] = None, **extra) -> None:
    payload = {"seconds": seconds, **extra}
    if reference_seconds is not None:
        payload["reference_seconds"] = reference_seconds
        payload["acceleration_ratio"] = reference_seconds / seconds if seconds > 0 else None
    _dump_json(payload, path)


def write_report(report: PpfReport, out_dir: str) -> list[str]:
    """Write report.json, kde_<name>.csv, variance_coefficients.csv and timing.json."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    path = os.path.join(out_dir, "report.json")
    _dump_json(report.to_dict(), path)
    written.append(path)

    for curve in report.curves:
        path = os.path.join(out_dir, f"kde_{curve.name.replace(':', '_')}.csv")
        pd.DataFrame({"grid": curve.grid, "density": curve.density}).to_csv(
            path, index=False, float_format=CSV_FLOAT_FORMAT
        )
        written.append(path)

    frames = [frame.assign(quantity=name) for name, frame in report.variance_coefficients.items()]
    path = os.path.join(out_dir, "variance_coefficients.csv")
    table = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()
    table.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    written.append(path)

    path = os.path.join(out_dir, "timing.json")
    write_timing(path, report.seconds, report.reference_seconds, solver=report.solver)
    written.append(path)
    logger.info(f"Wrote {len(written)} report files to {out_dir}")
    return written


_REQUIRED_KEYS = {
    "solver": str,
    "samples": int,
    "dropped": int,
    "moments": dict,
    "kde": list,
    "violations": list,
    "paired": list,
    "variance_coefficients": dict,
}
_OPTIONAL_NUMBERS = ("armse_angle", "armse_vm", "awd_angle", "awd_vm")


def validate_report(payload: dict) -> dict:
    if not isinstance(payload, dict):
        return {"valid": False, "error": "Report must be a JSON object", "code": "INVALID_TYPE"}
    for key, kind in _REQUIRED_KEYS.items():
        if key not in payload:
            return {"valid": False, "error": f"Missing key '{key}'", "code": "MISSING_KEY"}
        if not isinstance(payload[key], kind) or (kind is int and isinstance(payload[key], bool)):
            return {"valid": False, "error": f"'{key}' must be {kind.__name__}", "code": "INVALID_TYPE"}
    for key in _OPTIONAL_NUMBERS:
        value = payload.get(key)
        if value is not None and (not isinstance(value, (int, float)) or value < 0):
            return {"valid": False, "error": f"'{key}' must be a non-negative number or null", "code": "INVALID_VALUE"}
    for record in payload["violations"]:
        p = record.get("probability")
        if not isinstance(p, (int, float)) or not 0 <= p <= 1:
            return {"valid": False, "error": f"Probability of '{record.get('quantity')}' outside [0, 1]", "code": "INVALID_PROBABILITY"}
        if not 0 <= record.get("ci_low", -1) <= record.get("ci_high", -1) <= 1:
            return {"valid": False, "error": f"Confidence interval of '{record.get('quantity')}' is invalid", "code": "INVALID_INTERVAL"}
    for entry in payload["kde"]:
        if "name" not in entry:
            return {"valid": False, "error": "KDE entry without a name", "code": "MISSING_KEY"}
    return {"valid": True}
