from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np


class BusKind(str, Enum):
    SLACK = "slack"
    PV = "pv"
    PQ = "pq"


@dataclass(frozen=True)
class Bus:
    """
    One bus row in case-file units: demand in MW/MVAr, shunts in MW/MVAr at
    V = 1 p.u., angle in degrees (``va`` gives radians).
    """

    id: int
    kind: BusKind
    pd: float
    qd: float
    gs: float
    bs: float
    area: float
    vm: float
    va_deg: float
    base_kv: float
    zone: float
    vmax: float
    vmin: float

    @property
    def va(self) -> float:
        return math.radians(self.va_deg)


@dataclass(frozen=True)
class Generator:
    bus: int  # internal bus index
    pg: float  # MW
    qg: float  # MVAr
    qmax: float
    qmin: float
    vg: float  # p.u.


@dataclass(frozen=True)
class Branch:
    from_bus: int  # internal bus index
    to_bus: int
    r: float
    x: float
    b_c: float
    rate_a: float  # MVA, 0 = unlimited
    tap: float = 1.0
    shift_deg: float = 0.0

    @property
    def shift(self) -> float:
        return math.radians(self.shift_deg)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Network:
    """
    Parsed grid with 0-based contiguous bus indexing.

    ``Y`` is the full complex admittance matrix, ``Bprime`` the real
    susceptance matrix assembled without shunts and line charging. The bus
    partition is ``slack`` (one index), ``pv`` and ``pq`` (ascending).
    """

    base_mva: float
    buses: tuple[Bus, ...]
    gens: tuple[Generator, ...]
    branches: tuple[Branch, ...]
    Y: np.ndarray
    Bprime: np.ndarray
    slack: int
    pv: np.ndarray
    pq: np.ndarray
    bprime_mode: str = "series"
    name: str = "case"

    def __post_init__(self):
        for array in (self.Y, self.Bprime, self.pv, self.pq):
            _frozen(array)

    @property
    def n_bus(self) -> int:
        return len(self.buses)

    @property
    def n_pv(self) -> int:
        return len(self.pv)

    @property
    def n_pq(self) -> int:
        return len(self.pq)

    @property
    def dimension(self) -> int:
        """Length of the injection and unknown vectors, 2N - Ng - 2."""
        return self.n_pv + 2 * self.n_pq

    @cached_property
    def bus_ids(self) -> np.ndarray:
        return _frozen(np.array([bus.id for bus in self.buses], dtype=np.int64))

    @cached_property
    def bus_index(self) -> dict[int, int]:
        return {bus.id: i for i, bus in enumerate(self.buses)}

    @cached_property
    def pd(self) -> np.ndarray:
        return _frozen(np.array([bus.pd for bus in self.buses]) / self.base_mva)

    @cached_property
    def qd(self) -> np.ndarray:
        return _frozen(np.array([bus.qd for bus in self.buses]) / self.base_mva)

    @cached_property
    def pg(self) -> np.ndarray:
        """Aggregated in-service generation per bus, p.u."""
        out = np.zeros(self.n_bus)
        for gen in self.gens:
            out[gen.bus] += gen.pg
        return _frozen(out / self.base_mva)

    @cached_property
    def qg(self) -> np.ndarray:
        out = np.zeros(self.n_bus)
        for gen in self.gens:
            out[gen.bus] += gen.qg
        return _frozen(out / self.base_mva)

    @cached_property
    def vm_setpoint(self) -> np.ndarray:
        """First generator's Vg on generator buses, case Vm elsewhere."""
        out = np.array([bus.vm for bus in self.buses])
        seen = set()
        for gen in self.gens:
            if gen.bus not in seen:
                out[gen.bus] = gen.vg
                seen.add(gen.bus)
        return _frozen(out)

    @property
    def va_slack(self) -> float:
        return self.buses[self.slack].va

    @cached_property
    def branch_from(self) -> np.ndarray:
        return _frozen(np.array([br.from_bus for br in self.branches], dtype=np.int64))

    @cached_property
    def branch_to(self) -> np.ndarray:
        return _frozen(np.array([br.to_bus for br in self.branches], dtype=np.int64))

    @cached_property
    def rate_a(self) -> np.ndarray:
        return _frozen(np.array([br.rate_a for br in self.branches]))

    @cached_property
    def branch_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        """(Yf, Yt): from-end and to-end current rows per branch."""
        from .admittance import branch_admittances

        Yf, Yt = branch_admittances(self.branches, self.buses)
        return _frozen(Yf), _frozen(Yt)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "buses": self.n_bus,
            "pv": self.n_pv,
            "pq": self.n_pq,
            "branches": len(self.branches),
            "generators": len(self.gens),
            "dimension": self.dimension,
            "base_mva": self.base_mva,
        }
