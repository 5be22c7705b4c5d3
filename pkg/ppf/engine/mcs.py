from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from analytics.computation import (
    AffineModel,
    BranchFlows,
    branch_flows_batch,
    predict,
    states_from_unknowns,
)
from analytics.computation._header import NR_MAX_ITER, NR_TOLERANCE
from gridflow.exceptions import BadParameter, DimensionMismatch, TooManyDivergences
from network.case_io import Network
from surrogate.resnet import ResidualNet, infer

from ._header import MAX_DIVERGED_FRACTION, WARMUP_ROWS
from .dataset import solve_batch
from .scenario import ScenarioSpec, sample_injections

logger = logging.getLogger(__name__)

Solver = Union[str, ResidualNet, AffineModel]


@dataclass(eq=False)
class McsResult:
    """Per-sample unknowns with the reassembled bus states and derived branch flows."""

    solver: str
    X: np.ndarray
    Y: np.ndarray
    theta: np.ndarray
    vm: np.ndarray
    flows: BranchFlows
    seconds: float
    dropped: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    @property
    def samples(self) -> int:
        return self.Y.shape[0]


def solver_name(solver: Solver) -> str:
    if isinstance(solver, ResidualNet):
        return f"resnet:{solver.provenance.value}"
    if isinstance(solver, AffineModel):
        return f"affine:{solver.provenance.value}"
    return str(solver)


def _evaluate(solver: Solver, X: np.ndarray) -> np.ndarray:
    if isinstance(solver, ResidualNet):
        return infer(solver, X)
    return predict(solver, X)


def run_mcs(
    net: Network,
    spec: Optional[ScenarioSpec],
    solver: Solver = "nr",
    *,
    X: Optional[np.ndarray] = None,
    tol: float = NR_TOLERANCE,
    max_iter: int = NR_MAX_ITER,
    threads: int = 1,
    max_diverged_fraction: float = MAX_DIVERGED_FRACTION,
) -> McsResult:
    """
    Evaluate ``solver`` on the scenario samples (or on ``X`` when given).

    ``solver`` is "nr", a trained ResidualNet or an AffineModel. NR rows that
    fail are dropped and reported; the surrogate paths never drop rows. The
    timed section excludes one warm-up batch.
    """
    if X is None:
        if spec is None:
            raise BadParameter("run_mcs needs a scenario spec or an explicit sample matrix")
        X = sample_injections(net, spec)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != net.dimension:
        raise DimensionMismatch(f"samples have width {X.shape[1]}, expected {net.dimension}")
    name = solver_name(solver)

    if isinstance(solver, str):
        if solver != "nr":
            raise BadParameter(f"unknown solver '{solver}'")
        solve_batch(net, X[:1], tol=tol, max_iter=max_iter, threads=1)
        started = time.perf_counter()
        Y, ok, _ = solve_batch(net, X, tol=tol, max_iter=max_iter, threads=threads)
        seconds = time.perf_counter() - started
        dropped = np.flatnonzero(~ok)
        if len(dropped) > max_diverged_fraction * X.shape[0]:
            raise TooManyDivergences(len(dropped), X.shape[0])
        if len(dropped):
            logger.warning(f"NR dropped {len(dropped)} of {X.shape[0]} samples")
        X, Y = X[ok], Y[ok]
    else:
        _evaluate(solver, X[:WARMUP_ROWS])
        started = time.perf_counter()
        Y = _evaluate(solver, X)
        seconds = time.perf_counter() - started
        dropped = np.empty(0, dtype=np.int64)

    theta, vm = states_from_unknowns(net, Y)
    flows = branch_flows_batch(net, theta, vm)
    logger.info(f"{name}: {Y.shape[0]} samples in {seconds:.4f} s")
    return McsResult(
        solver=name,
        X=X,
        Y=Y,
        theta=theta,
        vm=vm,
        flows=flows,
        seconds=seconds,
        dropped=dropped,
    )
