from .admittance import branch_admittances, build_admittance
from .emitter import format_case
from .grid import Branch, Bus, BusKind, Generator, Network
from .parser import parse_case, read_case

__all__ = [
    'Branch',
    'Bus',
    'BusKind',
    'Generator',
    'Network',
    'branch_admittances',
    'build_admittance',
    'format_case',
    'parse_case',
    'read_case',
]
