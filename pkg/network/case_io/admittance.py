from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from gridflow.exceptions import BadParameter, ZeroImpedanceBranch

from ._header import BPRIME_MODES
from .grid import Branch, Bus

logger = logging.getLogger(__name__)


def _series_admittance(branches: Sequence[Branch], buses: Sequence[Bus], mode: str) -> np.ndarray:
    ys = np.empty(len(branches), dtype=complex)
    for k, br in enumerate(branches):
        if mode == "reactance":
            if br.x == 0.0:
                raise ZeroImpedanceBranch(k, buses[br.from_bus].id, buses[br.to_bus].id)
            ys[k] = 1.0 / complex(0.0, br.x)
        else:
            if br.r == 0.0 and br.x == 0.0:
                raise ZeroImpedanceBranch(k, buses[br.from_bus].id, buses[br.to_bus].id)
            ys[k] = 1.0 / complex(br.r, br.x)
    return ys


def _two_port(ys: np.ndarray, b_c: np.ndarray, tap: np.ndarray, shift: np.ndarray):
    """Standard pi model with an ideal transformer on the from side."""
    ratio = tap * np.exp(1j * shift)
    ytt = ys + 1j * b_c / 2.0
    yff = ytt / (tap * tap)
    yft = -ys / np.conj(ratio)
    ytf = -ys / ratio
    return yff, yft, ytf, ytt


def branch_admittances(
    branches: Sequence[Branch],
    buses: Sequence[Bus],
    *,
    charging: bool = True,
    mode: str = "series",
):
    """
    Per-branch from/to admittance rows.

    Returns (Yf, Yt), each of shape (n_branch, n_bus), so that the from-end
    current is ``Yf @ V`` and the to-end current ``Yt @ V``.
    """
    n_bus = len(buses)
    n_br = len(branches)
    Yf = np.zeros((n_br, n_bus), dtype=complex)
    Yt = np.zeros((n_br, n_bus), dtype=complex)
    if n_br == 0:
        return Yf, Yt

    ys = _series_admittance(branches, buses, mode)
    b_c = np.array([br.b_c for br in branches]) if charging else np.zeros(n_br)
    tap = np.array([br.tap for br in branches])
    shift = np.array([br.shift for br in branches])
    yff, yft, ytf, ytt = _two_port(ys, b_c, tap, shift)

    rows = np.arange(n_br)
    f = np.array([br.from_bus for br in branches])
    t = np.array([br.to_bus for br in branches])
    Yf[rows, f] = yff
    Yf[rows, t] = yft
    Yt[rows, f] = ytf
    Yt[rows, t] = ytt
    return Yf, Yt


def _assemble(Yf: np.ndarray, Yt: np.ndarray, branches: Sequence[Branch], n_bus: int) -> np.ndarray:
    Cf = np.zeros((len(branches), n_bus))
    Ct = np.zeros((len(branches), n_bus))
    for k, br in enumerate(branches):
        Cf[k, br.from_bus] = 1.0
        Ct[k, br.to_bus] = 1.0
    return Cf.T @ Yf + Ct.T @ Yt


def build_admittance(
    buses: Sequence[Bus],
    branches: Sequence[Branch],
    base_mva: float,
    *,
    bprime_mode: str = "series",
) -> tuple[np.ndarray, np.ndarray]:
    """
    Nodal admittance Y and the shunt-free susceptance matrix B'.

    Y includes line charging, taps, phase shifts and bus shunts (Gs + jBs)/base.
    B' keeps taps and shifts but drops line charging and shunts. In "series"
    mode its branch susceptance is -x/(r^2 + x^2); in "reactance" mode -1/x.
    """
    if bprime_mode not in BPRIME_MODES:
        raise BadParameter(f"bprime_mode must be one of {BPRIME_MODES}, got '{bprime_mode}'")
    if base_mva <= 0:
        raise BadParameter(f"base_mva must be positive, got {base_mva}")

    n_bus = len(buses)
    for k, br in enumerate(branches):
        if br.tap <= 0:
            raise BadParameter(f"branch {k} has non-positive tap ratio {br.tap}")

    Yf, Yt = branch_admittances(branches, buses)
    Y = _assemble(Yf, Yt, branches, n_bus)
    shunts = np.array([complex(bus.gs, bus.bs) for bus in buses]) / base_mva
    Y[np.diag_indices(n_bus)] += shunts

    Yf_p, Yt_p = branch_admittances(branches, buses, charging=False, mode=bprime_mode)
    Bprime = _assemble(Yf_p, Yt_p, branches, n_bus).imag.copy()

    logger.info(f"Assembled admittance for {n_bus} buses and {len(branches)} branches (B' mode: {bprime_mode})")
    return Y, Bprime
