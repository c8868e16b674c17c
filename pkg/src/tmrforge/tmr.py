"""Triplication and voter-insertion passes.

A voter station on net ``n`` splices three MAJ3 cells between the three
domain copies of ``n`` and their sinks: voter i reads n@D0, n@D1, n@D2 and
drives every domain-i sink, so one corrupted copy upstream of the station
is out-voted in all three domains downstream of it.

Final outputs converge in the output pad: the three domain voters of each
output bit feed one three-input OBUF that takes the majority, so no single
configurable cell sits between the voters and the pin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .netlist.ir import Cell, CellKind, Domain, Netlist, split_bit
from .netlist.validate import validate


def domain_name(name: str, i: int) -> str:
    return f"{name}__d{i}"


def origin_name(name: str) -> tuple[str, int | None]:
    base, sep, d = name.rpartition("__d")
    if sep and d.isdigit():
        return base, int(d)
    return name, None


def _domain_port(port: str, i: int) -> str:
    base, idx = split_bit(port)
    return f"{base}_d{i}[{idx}]" if "[" in port else f"{port}_d{i}"


def triplicate(netlist: Netlist) -> Netlist:
    """Three structurally identical copies tagged D0/D1/D2, each with its own ports."""
    if netlist.is_triplicated:
        raise ValueError(f"{netlist.name} is already triplicated")
    out = Netlist(f"{netlist.name}_tmr")
    for i in range(3):
        dom = Domain.of(i)
        for c in netlist:
            out.add(c.copy(
                name=domain_name(c.name, i),
                inputs=[domain_name(n, i) for n in c.inputs],
                output=domain_name(c.output, i) if c.output is not None else None,
                port=_domain_port(c.port, i) if c.port is not None else None,
                domain=dom,
            ))
    out.inputs = [_domain_port(p, i) for i in range(3) for p in netlist.inputs]
    out.outputs = [_domain_port(p, i) for i in range(3) for p in netlist.outputs]
    out.blocks = {k: {**v, "outputs": list(v.get("outputs", []))} for k, v in netlist.blocks.items()}
    return out


def voted_nets(netlist: Netlist) -> set[str]:
    """Original names of nets that already carry a voter station."""
    return {
        c.block.split(":", 1)[1]
        for c in netlist
        if c.role == "voter" and c.block and c.block.startswith("vote:")
    }


def insert_voters(netlist3: Netlist, cut) -> Netlist:
    if not netlist3.is_triplicated:
        raise ValueError("insert_voters needs a triplicated netlist")
    out = netlist3.copy()
    if not cut:
        return out
    nets = out.nets
    already = voted_nets(out)
    voter_outputs = {c.output for c in out if c.role == "voter"}
    for orig in sorted(cut):
        copies = [domain_name(orig, i) for i in range(3)]
        for n in copies:
            if n not in nets:
                raise ValueError(f"unknown cut net {orig!r}")
        if orig in already or any(n in voter_outputs for n in copies):
            raise ValueError(f"net {orig!r} is already inside a voter station")

    # splicing one net never changes the sink list of another cut net
    for orig in sorted(cut):
        copies = [domain_name(orig, i) for i in range(3)]
        voters = []
        for i in range(3):
            name = f"vote.{domain_name(orig, i)}"
            voters.append(Cell(
                name, CellKind.MAJ3, list(copies), name,
                domain=Domain.of(i), block=f"vote:{orig}", role="voter",
            ))
        for i, n in enumerate(copies):
            for sink, pin in nets[n].sinks:
                out.cells[sink].inputs[pin] = voters[i].output
        for v in voters:
            out.add(v)
    out.touch()
    return out


def vote_registers(netlist3: Netlist) -> Netlist:
    regs = {origin_name(c.output)[0] for c in netlist3 if c.kind is CellKind.FF}
    return insert_voters(netlist3, regs)


def converge_outputs(netlist3: Netlist, ports: list[str]) -> Netlist:
    """Replace the three per-domain OBUFs of each port by one majority pad."""
    out = netlist3.copy()
    by_port = {c.port: c for c in out if c.kind is CellKind.OBUF}
    for p in ports:
        cells = [by_port[_domain_port(p, i)] for i in range(3)]
        for c in cells:
            out.remove(c.name)
        out.add(Cell(
            f"obuf.{p}", CellKind.OBUF, [c.inputs[0] for c in cells], None,
            port=p, domain=Domain.SHARED, block="out",
        ))
    out.outputs = list(ports)
    return out


@dataclass(frozen=True)
class PartitionStrategy:
    name: str
    cuts: frozenset = field(default_factory=frozenset)

    @property
    def votes_registers(self) -> bool:
        return self.name != "p3_nv"

    @classmethod
    def custom(cls, cuts) -> "PartitionStrategy":
        return cls("custom", frozenset(cuts))

    @classmethod
    def parse(cls, name: str, cuts=()) -> "PartitionStrategy":
        name = name.lower()
        if name == "custom":
            return cls.custom(cuts)
        if name not in ("p1", "p2", "p3", "p3_nv"):
            raise ValueError(f"unknown strategy {name!r}")
        return cls(name)


P1 = PartitionStrategy("p1")
P2 = PartitionStrategy("p2")
P3 = PartitionStrategy("p3")
P3_NV = PartitionStrategy("p3_nv")
STRATEGIES = {"p1": P1, "p2": P2, "p3": P3, "p3_nv": P3_NV}


def strategy_cuts(netlist: Netlist, strategy: PartitionStrategy) -> set[str]:
    """Original net ids where the strategy places voter barriers (outputs excluded)."""
    if strategy.name == "custom":
        nets = netlist.nets
        missing = sorted(n for n in strategy.cuts if n not in nets)
        if missing:
            raise ValueError(f"custom cut nets not in netlist: {missing[:5]}")
        return set(strategy.cuts)
    kinds = {"p1": ("mult", "add"), "p2": ("add",)}.get(strategy.name, ())
    cuts: set[str] = set()
    for kind in kinds:
        blocks = netlist.blocks_of_kind(kind)
        if not blocks:
            raise ValueError(f"strategy {strategy.name} needs {kind} block annotations")
        for b in blocks:
            cuts.update(netlist.blocks[b]["outputs"])
    return cuts


def apply_partition(netlist: Netlist, strategy: PartitionStrategy) -> Netlist:
    """triplicate -> vote registers (unless p3_nv) -> barrier voters -> output voters."""
    if netlist.is_triplicated:
        raise ValueError("apply_partition expects an untriplicated netlist")
    bad = validate(netlist)
    if bad:
        raise ValueError(f"invalid netlist: {bad[:3]}")
    cuts = strategy_cuts(netlist, strategy)
    out_nets = {c.inputs[0] for c in netlist.output_cells()}

    nl = triplicate(netlist)
    if strategy.votes_registers:
        nl = vote_registers(nl)
    cuts = (cuts | out_nets) - voted_nets(nl)
    nl = insert_voters(nl, cuts)
    nl = converge_outputs(nl, list(netlist.outputs))
    nl.name = f"{netlist.name}_{strategy.name}"
    return nl


def tmr_stimuli(bits):
    """Replicate a (cycles, n) input bit matrix for the three domain port sets."""
    return np.tile(np.asarray(bits, dtype=np.uint8), (1, 3))
