"""Gate-level netlist IR.

A netlist is a flat list of cells connected by named nets. Every net is
driven by exactly one cell output; primary inputs are modelled as IBUF
cells bound to an input port and primary outputs as OBUF cells bound to an
output port, so the driver/sink bookkeeping never has to special-case ports.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator


class CellKind(str, enum.Enum):
    LUT = "LUT"
    FF = "FF"
    MAJ3 = "MAJ3"
    IBUF = "IBUF"
    OBUF = "OBUF"


class Domain(str, enum.Enum):
    D0 = "D0"
    D1 = "D1"
    D2 = "D2"
    SHARED = "Shared"

    @property
    def index(self) -> int:
        return {"D0": 0, "D1": 1, "D2": 2}[self.value]

    @classmethod
    def of(cls, i: int) -> "Domain":
        return (cls.D0, cls.D1, cls.D2)[i]


MAJ3_TABLE = 0b11101000  # bit m set iff popcount(m) >= 2


@dataclass
class Cell:
    name: str
    kind: CellKind
    inputs: list[str] = field(default_factory=list)
    output: str | None = None
    table: int = 0  # LUT truth table, bit m = f(minterm m), input 0 is the LSB
    init: int = 0  # FF power-up value
    port: str | None = None  # IBUF/OBUF binding
    domain: Domain | None = None
    block: str | None = None
    role: str | None = None  # "voter" for MAJ3 stations, "const" for tie cells

    def copy(self, **changes) -> "Cell":
        c = Cell(
            self.name, self.kind, list(self.inputs), self.output, self.table,
            self.init, self.port, self.domain, self.block, self.role,
        )
        for k, v in changes.items():
            setattr(c, k, v)
        return c

    @property
    def arity(self) -> int:
        return len(self.inputs)

    def evaluate(self, bits: tuple[int, ...]) -> int:
        """Two-valued combinational function of the cell."""
        if self.kind is CellKind.LUT:
            m = 0
            for i, b in enumerate(bits):
                m |= (b & 1) << i
            return (self.table >> m) & 1
        if self.kind is CellKind.MAJ3 or (self.kind is CellKind.OBUF and len(bits) == 3):
            return 1 if sum(bits) >= 2 else 0
        if self.kind is CellKind.OBUF:
            return bits[0]
        raise ValueError(f"{self.kind} has no combinational function")


@dataclass(frozen=True)
class Net:
    name: str
    driver: str
    sinks: tuple[tuple[str, int], ...]
    domain: Domain | None


_BIT_RE = re.compile(r"^(.*)\[(\d+)\]$")


def split_bit(port: str) -> tuple[str, int]:
    m = _BIT_RE.match(port)
    if not m:
        return port, 0
    return m.group(1), int(m.group(2))


def bus(name: str, width: int) -> list[str]:
    return [f"{name}[{i}]" for i in range(width)]


class Netlist:
    """Ordered collection of cells. Nets are derived from cell pins."""

    def __init__(self, name: str, cells: Iterable[Cell] = (), inputs=(), outputs=(), blocks=None):
        self.name = name
        self.cells: dict[str, Cell] = {}
        for c in cells:
            self.add(c)
        self.inputs: list[str] = list(inputs)
        self.outputs: list[str] = list(outputs)
        # block name -> {"kind": mult|add|reg|out, "index": int, "outputs": [net, ...]}
        self.blocks: dict[str, dict] = dict(blocks or {})
        self._nets: dict[str, Net] | None = None

    def add(self, cell: Cell) -> Cell:
        if cell.name in self.cells:
            raise ValueError(f"duplicate cell {cell.name}")
        self.cells[cell.name] = cell
        self._nets = None
        return cell

    def remove(self, name: str) -> None:
        del self.cells[name]
        self._nets = None

    def touch(self) -> None:
        self._nets = None

    def __iter__(self) -> Iterator[Cell]:
        return iter(self.cells.values())

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def nets(self) -> dict[str, Net]:
        if self._nets is None:
            self._nets = self._build_nets()
        return self._nets

    def _build_nets(self) -> dict[str, Net]:
        drivers: dict[str, list[str]] = {}
        sinks: dict[str, list[tuple[str, int]]] = {}
        for c in self.cells.values():
            if c.output is not None:
                drivers.setdefault(c.output, []).append(c.name)
            for i, n in enumerate(c.inputs):
                sinks.setdefault(n, []).append((c.name, i))
        nets = {}
        for n in list(drivers) + [s for s in sinks if s not in drivers]:
            d = drivers.get(n, [])
            drv = d[0] if d else ""
            dom = self.cells[drv].domain if drv else None
            nets[n] = Net(n, drv, tuple(sinks.get(n, ())), dom)
        return nets

    def driver_of(self, net: str) -> Cell:
        return self.cells[self.nets[net].driver]

    def input_cells(self) -> list[Cell]:
        by_port = {c.port: c for c in self.cells.values() if c.kind is CellKind.IBUF}
        return [by_port[p] for p in self.inputs]

    def output_cells(self) -> list[Cell]:
        by_port = {c.port: c for c in self.cells.values() if c.kind is CellKind.OBUF}
        return [by_port[p] for p in self.outputs]

    def count(self, kind: CellKind | None = None, domain: Domain | None = None, block_kind: str | None = None) -> int:
        n = 0
        for c in self.cells.values():
            if kind is not None and c.kind is not kind:
                continue
            if domain is not None and c.domain is not domain:
                continue
            if block_kind is not None and (c.block is None or self.blocks.get(c.block, {}).get("kind") != block_kind):
                continue
            n += 1
        return n

    def blocks_of_kind(self, kind: str) -> list[str]:
        return [b for b, meta in self.blocks.items() if meta["kind"] == kind]

    @property
    def is_triplicated(self) -> bool:
        return any(c.domain is not None for c in self.cells.values())

    def copy(self, name: str | None = None) -> "Netlist":
        nl = Netlist(name or self.name, (c.copy() for c in self.cells.values()), self.inputs, self.outputs)
        nl.blocks = {k: {**v, "outputs": list(v.get("outputs", []))} for k, v in self.blocks.items()}
        return nl

    def port_buses(self, direction: str) -> list[tuple[str, int]]:
        """Group bit-level ports into (bus name, width) in first-seen order."""
        ports = self.inputs if direction == "input" else self.outputs
        widths: dict[str, int] = {}
        for p in ports:
            base, i = split_bit(p)
            widths[base] = max(widths.get(base, 0), i + 1)
        return list(widths.items())

    def topo_order(self, through_ff: bool = False) -> list[str]:
        """Cell names in dependency order.

        With ``through_ff`` False, FF outputs count as sources (the usual
        combinational levelisation). With True, FF D-inputs are ordinary
        dependencies, which only succeeds for feed-forward designs.
        Raises ValueError on a cycle.
        """
        nets = self.nets
        indeg: dict[str, int] = {}
        readers: dict[str, list[str]] = {}
        for c in self.cells.values():
            deps = 0
            if through_ff or c.kind is not CellKind.FF:
                for n in c.inputs:
                    net = nets.get(n)
                    if net is None or not net.driver:
                        continue
                    deps += 1
                    readers.setdefault(net.driver, []).append(c.name)
            indeg[c.name] = deps
        ready = [name for name, d in indeg.items() if d == 0]
        order = []
        i = 0
        while i < len(ready):
            name = ready[i]
            i += 1
            order.append(name)
            for r in readers.get(name, ()):
                indeg[r] -= 1
                if indeg[r] == 0:
                    ready.append(r)
        if len(order) != len(self.cells):
            stuck = sorted(n for n, d in indeg.items() if d > 0)
            raise ValueError(f"cycle through cells {stuck[:8]}")
        return order
