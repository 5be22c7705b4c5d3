from __future__ import annotations

from .grid import BusKind, Network

_TYPE_CODES = {BusKind.SLACK: 3, BusKind.PV: 2, BusKind.PQ: 1}


def _num(value: float) -> str:
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def _rows(rows) -> str:
    return "\n".join("\t" + "\t".join(_num(v) for v in row) + ";" for row in rows)


def format_case(network: Network) -> str:
    """Serialize a Network back to the ``.m`` subset read by ``parse_case``."""
    ids = [bus.id for bus in network.buses]
    bus_rows = [
        (bus.id, _TYPE_CODES[bus.kind], bus.pd, bus.qd, bus.gs, bus.bs, bus.area,
         bus.vm, bus.va_deg, bus.base_kv, bus.zone, bus.vmax, bus.vmin)
        for bus in network.buses
    ]
    gen_rows = [
        (ids[gen.bus], gen.pg, gen.qg, gen.qmax, gen.qmin, gen.vg, network.base_mva, 1)
        for gen in network.gens
    ]
    branch_rows = [
        (ids[br.from_bus], ids[br.to_bus], br.r, br.x, br.b_c, br.rate_a, br.rate_a, br.rate_a,
         br.tap, br.shift_deg, 1)
        for br in network.branches
    ]
    return "\n".join([
        f"function mpc = {network.name}",
        "mpc.version = '2';",
        f"mpc.baseMVA = {_num(network.base_mva)};",
        "",
        "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin",
        "mpc.bus = [",
        _rows(bus_rows),
        "];",
        "",
        "%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus",
        "mpc.gen = [",
        _rows(gen_rows),
        "];",
        "",
        "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus",
        "mpc.branch = [",
        _rows(branch_rows),
        "];",
        "",
    ])
