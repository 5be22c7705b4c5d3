"""
Reader for the numeric subset of the MATPOWER ``.m`` case format.

Supported: ``mpc.baseMVA = <number>;`` and the ``mpc.bus``, ``mpc.gen`` and
``mpc.branch`` matrices (rows separated by ``;`` or newlines, ``%`` comments).
Other blocks such as ``gencost`` are ignored. Expressions are not evaluated.
"""
from __future__ import annotations

import logging
import os
import re
from typing import Optional

import numpy as np

from gridflow.exceptions import (
    DuplicateBusId,
    MalformedRow,
    MissingBlock,
    MultipleSlackBuses,
    NoSlackBus,
)

from . import _header as h
from .admittance import build_admittance
from .grid import Branch, Bus, BusKind, Generator, Network

logger = logging.getLogger(__name__)

_BASE_MVA = re.compile(r"mpc\.baseMVA\s*=\s*([^;\n]*)")
_BLOCK_START = re.compile(r"mpc\.(\w+)\s*=\s*\[")
_FUNCTION = re.compile(r"^\s*function\s+\w+\s*=\s*(\w+)", re.MULTILINE)
_KINDS = {h.SLACK_TYPE: BusKind.SLACK, h.PV_TYPE: BusKind.PV, h.PQ_TYPE: BusKind.PQ}


def _strip_comments(text: str) -> str:
    return "\n".join(line.split("%", 1)[0] for line in text.splitlines())


def _line_of(text: str, offset: int) -> int:
    return text.count("\n", 0, offset) + 1


def _extract_blocks(text: str) -> dict[str, list[tuple[int, list[float]]]]:
    """Map block name to its rows, each row tagged with its 1-based line number."""
    blocks: dict[str, list[tuple[int, list[float]]]] = {}
    for match in _BLOCK_START.finditer(text):
        name = match.group(1)
        start = match.end()
        end = text.find("]", start)
        if end < 0:
            raise MalformedRow(_line_of(text, match.start()), f"block '{name}' is not closed with ']'")

        rows: list[tuple[int, list[float]]] = []
        first_line = _line_of(text, start)
        for offset, raw_line in enumerate(text[start:end].split("\n")):
            line_no = first_line + offset
            for chunk in raw_line.split(";"):
                tokens = chunk.replace(",", " ").split()
                if not tokens:
                    continue
                try:
                    rows.append((line_no, [float(tok) for tok in tokens]))
                except ValueError:
                    raise MalformedRow(line_no, f"non-numeric entry in block '{name}': {chunk.strip()!r}") from None
        blocks[name] = rows
    return blocks


def _parse_base_mva(text: str) -> float:
    match = _BASE_MVA.search(text)
    if match is None:
        raise MissingBlock("baseMVA")
    try:
        return float(match.group(1).strip())
    except ValueError:
        raise MalformedRow(_line_of(text, match.start()), f"baseMVA is not a number: {match.group(1).strip()!r}") from None


def _require_columns(line: int, row: list[float], count: int, block: str) -> None:
    if len(row) < count:
        raise MalformedRow(line, f"{block} row has {len(row)} columns, needs at least {count}")


def _parse_buses(rows) -> list[Bus]:
    buses = []
    seen: set[int] = set()
    for line, row in rows:
        _require_columns(line, row, h.BUS_COLUMNS, "bus")
        bus_id = int(row[h.BUS_I])
        if bus_id != row[h.BUS_I]:
            raise MalformedRow(line, f"bus id {row[h.BUS_I]} is not an integer")
        if bus_id in seen:
            raise DuplicateBusId(bus_id)
        seen.add(bus_id)
        kind = _KINDS.get(int(row[h.BUS_TYPE]))
        if kind is None:
            raise MalformedRow(line, f"unsupported bus type {row[h.BUS_TYPE]:g} for bus {bus_id}")
        if row[h.VM] <= 0:
            raise MalformedRow(line, f"bus {bus_id} has non-positive voltage magnitude")
        buses.append(
            Bus(
                id=bus_id,
                kind=kind,
                pd=row[h.PD],
                qd=row[h.QD],
                gs=row[h.GS],
                bs=row[h.BS],
                area=row[h.BUS_AREA],
                vm=row[h.VM],
                va_deg=row[h.VA],
                base_kv=row[h.BASE_KV],
                zone=row[h.ZONE],
                vmax=row[h.VMAX],
                vmin=row[h.VMIN],
            )
        )
        if not row[h.VMIN] <= row[h.VM] <= row[h.VMAX]:
            logger.warning(f"Bus {bus_id}: Vm={row[h.VM]} outside [{row[h.VMIN]}, {row[h.VMAX]}]")
    return buses


def _lookup(index: dict[int, int], line: int, value: float, role: str) -> int:
    try:
        return index[int(value)]
    except KeyError:
        raise MalformedRow(line, f"{role} refers to unknown bus {value:g}") from None


def _parse_gens(rows, index: dict[int, int]) -> list[Generator]:
    gens = []
    for line, row in rows:
        _require_columns(line, row, h.GEN_COLUMNS, "gen")
        if len(row) > h.GEN_STATUS and row[h.GEN_STATUS] <= 0:
            continue
        gens.append(
            Generator(
                bus=_lookup(index, line, row[h.GEN_BUS], "generator"),
                pg=row[h.PG],
                qg=row[h.QG],
                qmax=row[h.QMAX],
                qmin=row[h.QMIN],
                vg=row[h.VG],
            )
        )
    return gens


def _parse_branches(rows, index: dict[int, int]) -> list[Branch]:
    branches = []
    skipped = 0
    for line, row in rows:
        _require_columns(line, row, h.BRANCH_COLUMNS, "branch")
        if row[h.BR_STATUS] <= 0:
            skipped += 1
            continue
        tap = row[h.TAP]
        if tap < 0:
            raise MalformedRow(line, f"negative tap ratio {tap:g}")
        branches.append(
            Branch(
                from_bus=_lookup(index, line, row[h.F_BUS], "branch from-end"),
                to_bus=_lookup(index, line, row[h.T_BUS], "branch to-end"),
                r=row[h.BR_R],
                x=row[h.BR_X],
                b_c=row[h.BR_B],
                rate_a=row[h.RATE_A],
                tap=tap if tap != 0.0 else 1.0,
                shift_deg=row[h.SHIFT],
            )
        )
    if skipped:
        logger.info(f"Skipped {skipped} out-of-service branches")
    return branches


def parse_case(text: str, *, name: Optional[str] = None, bprime_mode: str = "series") -> Network:
    """
    Parse case-file text into an immutable Network.

    Raises MissingBlock, DuplicateBusId, NoSlackBus, MultipleSlackBuses,
    MalformedRow (with the offending line number) and ZeroImpedanceBranch.
    """
    clean = _strip_comments(text)
    base_mva = _parse_base_mva(clean)
    blocks = _extract_blocks(clean)
    for block in h.REQUIRED_BLOCKS:
        if block not in blocks:
            raise MissingBlock(block)

    buses = _parse_buses(blocks["bus"])
    slack_ids = [bus.id for bus in buses if bus.kind is BusKind.SLACK]
    if not slack_ids:
        raise NoSlackBus()
    if len(slack_ids) > 1:
        raise MultipleSlackBuses(slack_ids)

    index = {bus.id: i for i, bus in enumerate(buses)}
    gens = _parse_gens(blocks["gen"], index)
    branches = _parse_branches(blocks["branch"], index)
    Y, Bprime = build_admittance(buses, branches, base_mva, bprime_mode=bprime_mode)

    if name is None:
        match = _FUNCTION.search(clean)
        name = match.group(1) if match else "case"

    kinds = [bus.kind for bus in buses]
    network = Network(
        base_mva=base_mva,
        buses=tuple(buses),
        gens=tuple(gens),
        branches=tuple(branches),
        Y=Y,
        Bprime=Bprime,
        slack=kinds.index(BusKind.SLACK),
        pv=np.array([i for i, k in enumerate(kinds) if k is BusKind.PV], dtype=np.int64),
        pq=np.array([i for i, k in enumerate(kinds) if k is BusKind.PQ], dtype=np.int64),
        bprime_mode=bprime_mode,
        name=name,
    )
    logger.info(f"Parsed case {network.describe()}")
    return network


def read_case(path: str, *, bprime_mode: str = "series") -> Network:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except FileNotFoundError as e:
        error_msg = f"Case file not found: {path}"
        logger.error(error_msg)
        raise FileNotFoundError(error_msg) from e
    name = os.path.splitext(os.path.basename(path))[0]
    return parse_case(text, name=name, bprime_mode=bprime_mode)
