from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from sklearn.preprocessing import StandardScaler

from gridflow.exceptions import (
    BadParameter,
    DimensionMismatch,
    NonFinite,
    SingularJacobian,
    SingularMatrix,
    SingularSystem,
)
from network.case_io import Network

from ._header import NR_MAX_ITER, NR_TOLERANCE, RIDGE_LAMBDA_PER_SAMPLE
from .acpf import base_injections, jacobian, newton_raphson, unknowns_from_state
from .numerics import lu_solve, pinv

logger = logging.getLogger(__name__)


class Provenance(str, Enum):
    LINEARIZED_PF = "linearized_pf"
    JACOBIAN = "jacobian"
    RIDGE = "ridge"
    RANDOM = "random"


@dataclass(frozen=True, eq=False)
class AffineModel:
    """y = Ws x + bs, with Ws of shape (outputs, inputs)."""

    Ws: np.ndarray
    bs: np.ndarray
    provenance: Provenance

    def __post_init__(self):
        if self.Ws.ndim != 2 or self.bs.shape != (self.Ws.shape[0],):
            raise DimensionMismatch(f"Ws {self.Ws.shape} and bs {self.bs.shape} do not chain")
        if not (np.all(np.isfinite(self.Ws)) and np.all(np.isfinite(self.bs))):
            raise NonFinite(f"{self.provenance.value} affine model has non-finite entries")


@dataclass(frozen=True, eq=False)
class DlpfBlocks:
    """x = E c + F y with c = [theta_s, V_s, V_g]."""

    E: np.ndarray
    F: np.ndarray
    c: np.ndarray


def dlpf_blocks(net: Network) -> DlpfBlocks:
    G = net.Y.real
    B = net.Y.imag
    Bp = net.Bprime
    s = [net.slack]
    g = net.pv
    l = net.pq

    def blk(M, rows, cols):
        return M[np.ix_(rows, cols)]

    E = np.block([
        [-blk(Bp, g, s), blk(G, g, s), blk(G, g, g)],
        [-blk(Bp, l, s), blk(G, l, s), blk(G, l, g)],
        [-blk(G, l, s), -blk(B, l, s), -blk(B, l, g)],
    ])
    F = np.block([
        [-blk(Bp, g, g), -blk(Bp, g, l), blk(G, g, l)],
        [-blk(Bp, l, g), -blk(Bp, l, l), blk(G, l, l)],
        [-blk(G, l, g), -blk(G, l, l), -blk(B, l, l)],
    ])
    c = np.concatenate([[net.va_slack, net.vm_setpoint[net.slack]], net.vm_setpoint[g]])
    return DlpfBlocks(E=E, F=F, c=c)


def init_linearized_pf(net: Network) -> AffineModel:
    """Ws = pinv(F), bs = -pinv(F) E c (F is singular when zero-injection buses exist)."""
    blocks = dlpf_blocks(net)
    Ws = pinv(blocks.F)
    bs = -Ws @ (blocks.E @ blocks.c)
    return AffineModel(Ws=Ws, bs=bs, provenance=Provenance.LINEARIZED_PF)


def init_jacobian(net: Network, tol: float = NR_TOLERANCE, max_iter: int = NR_MAX_ITER) -> AffineModel:
    """First-order expansion around the NR solution of the base case: Ws = J^-1, bs = y0 - J^-1 x0."""
    x0 = base_injections(net)
    state, iterations = newton_raphson(net, x0, tol=tol, max_iter=max_iter)
    y0 = unknowns_from_state(net, state)
    J = jacobian(net, state)
    try:
        Ws = lu_solve(J, np.eye(net.dimension))
    except SingularMatrix as e:
        raise SingularJacobian(f"base-case Jacobian is singular at pivot {e.pivot}") from e
    logger.info(f"Jacobian model centred on base case solved in {iterations} iterations")
    return AffineModel(Ws=Ws, bs=y0 - Ws @ x0, provenance=Provenance.JACOBIAN)


def _as_2d(X, name: str) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {X.shape}")
    return X


def ridge_fit(X, Y, lam: Optional[float] = None, *, standardize: bool = False) -> AffineModel:
    """
    Multi-output ridge regression with an unpenalized intercept.

    Centering X and Y is the same as the (I - 11^T/n) projection form; all
    outputs share one factorization of Xc^T Xc + lam I. ``lam`` defaults to
    1e-3 * n. With ``standardize`` the penalty acts on unit-variance inputs and
    the coefficients are mapped back to raw units.
    """
    X = _as_2d(X, "X")
    Y = _as_2d(Y, "Y")
    n = X.shape[0]
    if Y.shape[0] != n:
        raise DimensionMismatch(f"X has {n} rows, Y has {Y.shape[0]}")
    if n < 2:
        raise BadParameter(f"ridge_fit needs at least 2 samples, got {n}")
    if lam is None:
        lam = RIDGE_LAMBDA_PER_SAMPLE * n
    if lam < 0:
        raise BadParameter(f"lambda must be non-negative, got {lam}")

    scaler = StandardScaler().fit(X) if standardize else None
    Z = scaler.transform(X) if scaler is not None else X
    z_mean = Z.mean(axis=0)
    y_mean = Y.mean(axis=0)
    Zc = Z - z_mean
    Yc = Y - y_mean

    A = Zc.T @ Zc + lam * np.eye(Z.shape[1])
    try:
        W = lu_solve(A, Zc.T @ Yc)
    except SingularMatrix as e:
        raise SingularSystem(f"ridge normal equations are singular at pivot {e.pivot} (lambda={lam})") from e

    x_mean = z_mean
    if scaler is not None:
        W = W / scaler.scale_[:, None]
        x_mean = scaler.mean_
    bs = y_mean - x_mean @ W
    return AffineModel(Ws=W.T.copy(), bs=bs, provenance=Provenance.RIDGE)


def ridge_objective(model: AffineModel, X, Y, lam: float) -> float:
    """Sum over outputs of ||y_i - X w_i - b_i||^2 + lam ||w_i||^2."""
    residual = _as_2d(Y, "Y") - predict(model, X)
    return float(np.sum(residual ** 2) + lam * np.sum(model.Ws ** 2))


def ridge_gradients(model: AffineModel, X, Y, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of ``ridge_objective`` with respect to Ws (rows w_i) and bs."""
    X = _as_2d(X, "X")
    residual = _as_2d(Y, "Y") - predict(model, X)
    dW = -2.0 * residual.T @ X + 2.0 * lam * model.Ws
    db = -2.0 * residual.sum(axis=0)
    return dW, db


def predict(model: AffineModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != model.Ws.shape[1]:
        raise DimensionMismatch(f"input width {X.shape[1]} does not match model width {model.Ws.shape[1]}")
    out = X @ model.Ws.T + model.bs
    return out[0] if single else out
