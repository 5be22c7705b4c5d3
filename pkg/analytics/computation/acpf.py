"""
AC power flow in polar coordinates.

Vector conventions for a network with slack s, PV set g and PQ set l
(each in ascending bus order):

    injections  x = [P_g; P_l; Q_l]        (net injection, generation - demand)
    unknowns    y = [theta_g; theta_l; V_l]

Both have length 2N - Ng - 2. The slack phasor and PV magnitudes are fixed.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from gridflow.exceptions import BadParameter, DimensionMismatch, Diverged, SingularJacobian, SingularMatrix
from network.case_io import Network

from ._header import NR_GROWTH_LIMIT, NR_MAX_ITER, NR_TOLERANCE
from .numerics import lu_solve

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PfState:
    theta: np.ndarray  # radians
    vm: np.ndarray  # p.u.

    def __post_init__(self):
        if self.theta.shape != self.vm.shape or self.theta.ndim != 1:
            raise DimensionMismatch(f"theta {self.theta.shape} and vm {self.vm.shape} must be equal 1-D shapes")

    @property
    def voltage(self) -> np.ndarray:
        return self.vm * np.exp(1j * self.theta)


@dataclass(frozen=True, eq=False)
class BranchFlows:
    """From-end (pf, qf) and to-end (pt, qt) flows in p.u.; s_mva is |S_from| in MVA."""

    pf: np.ndarray
    qf: np.ndarray
    pt: np.ndarray
    qt: np.ndarray
    s_mva: np.ndarray

    @property
    def losses(self) -> np.ndarray:
        return (self.pf + self.pt) + 1j * (self.qf + self.qt)


def _check_state(net: Network, state: PfState) -> None:
    if state.theta.shape != (net.n_bus,):
        raise DimensionMismatch(f"state has {state.theta.shape[0]} buses, network has {net.n_bus}")


def _check_vector(net: Network, v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (net.dimension,):
        raise DimensionMismatch(f"{name} has shape {v.shape}, expected ({net.dimension},)")
    return v


def flat_start(net: Network) -> PfState:
    theta = np.full(net.n_bus, net.va_slack)
    vm = np.ones(net.n_bus)
    vm[net.slack] = net.vm_setpoint[net.slack]
    vm[net.pv] = net.vm_setpoint[net.pv]
    return PfState(theta=theta, vm=vm)


def injection_vector(net: Network, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Restrict full per-bus injections to x = [P_g; P_l; Q_l]. Works row-wise on 2-D input."""
    P = np.asarray(P)
    Q = np.asarray(Q)
    return np.concatenate([P[..., net.pv], P[..., net.pq], Q[..., net.pq]], axis=-1)


def base_injections(net: Network) -> np.ndarray:
    """x0 from the case file: in-service generation minus demand."""
    return injection_vector(net, net.pg - net.pd, net.qg - net.qd)


def unknowns_from_state(net: Network, state: PfState) -> np.ndarray:
    _check_state(net, state)
    return np.concatenate([state.theta[net.pv], state.theta[net.pq], state.vm[net.pq]])


def states_from_unknowns(net: Network, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Splice rows of unknowns with the fixed slack phasor and PV magnitudes."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[1] != net.dimension:
        raise DimensionMismatch(f"unknowns have width {Y.shape[1]}, expected {net.dimension}")
    n = Y.shape[0]
    n_pv, n_pq = net.n_pv, net.n_pq
    theta = np.full((n, net.n_bus), net.va_slack)
    vm = np.tile(net.vm_setpoint, (n, 1))
    theta[:, net.pv] = Y[:, :n_pv]
    theta[:, net.pq] = Y[:, n_pv:n_pv + n_pq]
    vm[:, net.pq] = Y[:, n_pv + n_pq:]
    return theta, vm


def state_from_unknowns(net: Network, y) -> PfState:
    theta, vm = states_from_unknowns(net, _check_vector(net, y, "y"))
    return PfState(theta=theta[0], vm=vm[0])


def injections_batch(net: Network, theta: np.ndarray, vm: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    V = vm * np.exp(1j * theta)
    S = V * np.conj(V @ net.Y.T)
    return S.real, S.imag


def power_injections(net: Network, state: PfState) -> tuple[np.ndarray, np.ndarray]:
    """Net injections P_i, Q_i at every bus, S = V * conj(Y V)."""
    _check_state(net, state)
    P, Q = injections_batch(net, state.theta, state.vm)
    return P, Q


def branch_flows_batch(net: Network, theta: np.ndarray, vm: np.ndarray) -> BranchFlows:
    Yf, Yt = net.branch_matrices
    V = vm * np.exp(1j * theta)
    Sf = V[..., net.branch_from] * np.conj(V @ Yf.T)
    St = V[..., net.branch_to] * np.conj(V @ Yt.T)
    return BranchFlows(
        pf=Sf.real,
        qf=Sf.imag,
        pt=St.real,
        qt=St.imag,
        s_mva=np.abs(Sf) * net.base_mva,
    )


def branch_flows(net: Network, state: PfState) -> BranchFlows:
    """Flows on every in-service branch with taps and phase shifts included."""
    _check_state(net, state)
    return branch_flows_batch(net, state.theta, state.vm)


def mismatch(net: Network, x, state: PfState) -> np.ndarray:
    """Computed minus specified injections, ordered like x."""
    P, Q = power_injections(net, state)
    return injection_vector(net, P, Q) - x


def jacobian(net: Network, state: PfState) -> np.ndarray:
    """
    d[P_g; P_l; Q_l] / d[theta_g; theta_l; V_l] from the complex derivatives

        dS/dVm = diag(V) conj(Y diag(V/|V|)) + conj(diag(I)) diag(V/|V|)
        dS/dVa = j diag(V) conj(diag(I) - Y diag(V))
    """
    _check_state(net, state)
    V = state.voltage
    Y = net.Y
    current = Y @ V
    v_norm = V / np.abs(V)

    dS_dVm = V[:, None] * np.conj(Y * v_norm[None, :]) + np.diag(np.conj(current) * v_norm)
    dS_dVa = 1j * V[:, None] * np.conj(np.diag(current) - Y * V[None, :])

    pvpq = np.concatenate([net.pv, net.pq])
    pq = net.pq
    J11 = dS_dVa[np.ix_(pvpq, pvpq)].real
    J12 = dS_dVm[np.ix_(pvpq, pq)].real
    J21 = dS_dVa[np.ix_(pq, pvpq)].imag
    J22 = dS_dVm[np.ix_(pq, pq)].imag
    return np.block([[J11, J12], [J21, J22]])


def newton_raphson(
    net: Network,
    x,
    start: Optional[PfState] = None,
    tol: float = NR_TOLERANCE,
    max_iter: int = NR_MAX_ITER,
    *,
    growth_limit: int = NR_GROWTH_LIMIT,
) -> tuple[PfState, int]:
    """
    Full Newton-Raphson on the polar mismatch equations.

    Returns the converged state and the number of updates taken. Raises
    Diverged when max_iter is reached or the mismatch grows for
    ``growth_limit`` consecutive iterations, SingularJacobian when a step
    cannot be solved.
    """
    x = _check_vector(net, x, "x")
    if tol <= 0:
        raise BadParameter(f"tol must be positive, got {tol}")
    start = start or flat_start(net)
    _check_state(net, start)

    theta = start.theta.astype(float).copy()
    vm = start.vm.astype(float).copy()
    theta[net.slack] = net.va_slack
    vm[net.slack] = net.vm_setpoint[net.slack]
    vm[net.pv] = net.vm_setpoint[net.pv]

    pvpq = np.concatenate([net.pv, net.pq])
    n_ang = len(pvpq)
    previous = np.inf
    growing = 0
    iteration = 0
    while True:
        state = PfState(theta=theta, vm=vm)
        F = mismatch(net, x, state)
        norm = float(np.max(np.abs(F))) if F.size else 0.0
        logger.debug(f"NR iteration {iteration}: mismatch {norm:.3e}")
        if not np.isfinite(norm):
            raise Diverged(iteration, norm)
        if norm <= tol:
            return PfState(theta=theta.copy(), vm=vm.copy()), iteration
        if iteration >= max_iter:
            raise Diverged(iteration, norm)

        growing = growing + 1 if norm > previous else 0
        if growing >= growth_limit:
            raise Diverged(iteration, norm)
        previous = norm

        try:
            step = lu_solve(jacobian(net, state), -F)
        except SingularMatrix as e:
            raise SingularJacobian(f"singular Jacobian at iteration {iteration} (pivot {e.pivot})") from e
        theta[pvpq] += step[:n_ang]
        vm[net.pq] += step[n_ang:]
        if np.any(vm <= 0):
            raise Diverged(iteration + 1, norm)
        iteration += 1


def solve_unknowns(net: Network, x, tol: float = NR_TOLERANCE, max_iter: int = NR_MAX_ITER) -> np.ndarray:
    """NR from flat start, returned as the unknown vector y."""
    state, _ = newton_raphson(net, x, tol=tol, max_iter=max_iter)
    return unknowns_from_state(net, state)
