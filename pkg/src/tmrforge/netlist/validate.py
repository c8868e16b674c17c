"""Structural checks for :class:`~tmrforge.netlist.ir.Netlist`."""

from __future__ import annotations

from dataclasses import dataclass

from .ir import CellKind, Netlist


@dataclass(frozen=True)
class Violation:
    rule: str
    subject: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.rule}({self.subject}){': ' + self.detail if self.detail else ''}"


def validate(netlist: Netlist) -> list[Violation]:
    out: list[Violation] = []
    drivers: dict[str, list[str]] = {}
    sunk: set[str] = set()
    for c in netlist:
        if c.output is not None:
            drivers.setdefault(c.output, []).append(c.name)
        sunk.update(c.inputs)

        if c.kind is CellKind.LUT:
            if len(c.inputs) > 4:
                out.append(Violation("LutTooWide", c.name, f"k={len(c.inputs)}"))
            if c.table >> (1 << len(c.inputs)):
                out.append(Violation("TruthTableLength", c.name))
        elif c.kind is CellKind.MAJ3 and len(c.inputs) != 3:
            out.append(Violation("Maj3Arity", c.name, f"{len(c.inputs)} inputs"))
        elif c.kind is CellKind.FF and len(c.inputs) != 1:
            out.append(Violation("FfArity", c.name))
        elif c.kind is CellKind.IBUF and (c.inputs or c.port not in netlist.inputs):
            out.append(Violation("PortBinding", c.name))
        elif c.kind is CellKind.OBUF and (len(c.inputs) not in (1, 3) or c.port not in netlist.outputs):
            out.append(Violation("PortBinding", c.name))
        if c.kind is not CellKind.OBUF and c.output is None:
            out.append(Violation("MissingOutput", c.name))
        if any(not n for n in c.inputs):
            out.append(Violation("UnconnectedPin", c.name))

    for net, ds in sorted(drivers.items()):
        if len(ds) > 1:
            out.append(Violation("MultipleDrivers", net, ",".join(ds)))
        # an unread input pad is an unused port, not a dangling net
        if net not in sunk and netlist.cells[ds[0]].kind is not CellKind.IBUF:
            out.append(Violation("DanglingNet", net))
    for net in sorted(sunk - drivers.keys()):
        out.append(Violation("UndrivenNet", net))

    ports_in = [c.port for c in netlist if c.kind is CellKind.IBUF]
    ports_out = [c.port for c in netlist if c.kind is CellKind.OBUF]
    if sorted(ports_in) != sorted(netlist.inputs):
        out.append(Violation("PortBinding", "inputs", "IBUF set differs from input ports"))
    if sorted(ports_out) != sorted(netlist.outputs):
        out.append(Violation("PortBinding", "outputs", "OBUF set differs from output ports"))

    tagged = {c.domain is not None for c in netlist}
    if len(tagged) > 1:
        untagged = sorted(c.name for c in netlist if c.domain is None)
        out.append(Violation("MixedDomainTags", untagged[0], f"{len(untagged)} untagged cells"))

    if not any(v.rule == "MultipleDrivers" for v in out):
        try:
            netlist.topo_order(through_ff=False)
        except ValueError as e:
            out.append(Violation("CombinationalCycle", netlist.name, str(e)))
    return out
