"""Place, route and emit a configuration; the result is an :class:`Implementation`."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..fabric.arch import ArchParams, FabricArch, make_arch
from ..fabric.bitstream import read_bitstream, write_bitstream
from ..netlist.io import from_dict, to_dict
from ..netlist.ir import MAJ3_TABLE, CellKind, Domain, Netlist
from ..netlist.validate import validate
from .place import Placement, audit_floorplan, place
from .route import Routing, audit_routing, route


def expand_table(table: int, k: int, pins=None) -> int:
    """A k-input truth table as 16 LUT4 bits, input i wired to ``pins[i]``.

    Pins that carry no input are don't-cares.
    """
    pins = list(range(k)) if pins is None else list(pins)
    out = 0
    for m in range(16):
        idx = 0
        for i, p in enumerate(pins):
            idx |= ((m >> p) & 1) << i
        out |= ((table >> idx) & 1) << m
    return out


@dataclass
class Implementation:
    netlist: Netlist
    arch: FabricArch
    placement: Placement
    routing: Routing
    config: np.ndarray
    owner: dict[int, str] = field(default_factory=dict)  # fabric node -> net
    floorplan: bool = False

    def __post_init__(self):
        self.config = np.asarray(self.config, dtype=np.uint8)
        self.config.setflags(write=False)
        nets = self.netlist.nets
        self.net_domain: dict[str, Domain | None] = {n: v.domain for n, v in nets.items()}
        self.le_cell = {le: c for c, le in self.placement.les.items()}
        self.pad_cell = {p: c for c, p in self.placement.pads.items()}
        self.input_pads = self._port_pads(CellKind.IBUF, self.netlist.inputs)
        self.output_pads = self._port_pads(CellKind.OBUF, self.netlist.outputs)
        self._programmed = None

    def _port_pads(self, kind, ports):
        by_port = {c.port: c.name for c in self.netlist if c.kind is kind}
        return [self.placement.pads[by_port[p]] for p in ports]

    @property
    def name(self) -> str:
        return self.netlist.name

    def domains_of(self, nets) -> frozenset:
        out = set()
        for n in nets:
            d = self.net_domain.get(n)
            if d is not None:
                out.add(d.value)
        return frozenset(out)

    def to_sidecar(self) -> dict:
        return {
            "arch": self.arch.params.__dict__,
            "arch_hash": self.arch.hash,
            "floorplan": self.floorplan,
            "netlist": to_dict(self.netlist),
            "placement": self.placement.to_dict(),
            "routing": self.routing.to_dict(),
            "ownership": sorted([int(k), v] for k, v in self.owner.items()),
        }

    def save(self, path) -> None:
        """Bitstream at ``path`` plus a JSON sidecar at ``path + '.json'``."""
        path = Path(path)
        write_bitstream(path, self.arch, self.config)
        Path(str(path) + ".json").write_text(json.dumps(self.to_sidecar(), sort_keys=True))

    @classmethod
    def load(cls, path) -> "Implementation":
        path = Path(path)
        side = json.loads(Path(str(path) + ".json").read_text())
        arch = make_arch(ArchParams(**side["arch"]))
        config = read_bitstream(path, arch)
        return cls(
            from_dict(side["netlist"]), arch,
            Placement.from_dict(side["placement"]), Routing.from_dict(side["routing"]),
            config, {int(k): v for k, v in side["ownership"]}, side["floorplan"],
        )


def emit_config(netlist: Netlist, arch: FabricArch, pl: Placement, rt: Routing) -> tuple[np.ndarray, dict[int, str]]:
    cfg = np.zeros(arch.total_bits, dtype=np.uint8)
    owner: dict[int, str] = {}
    pin_of = {key: p for r in rt.nets.values() for key, p in r.sinks.items()}
    for name, le in pl.les.items():
        c = netlist.cells[name]
        owner[arch.out_node(le)] = c.output
        pins = [pin_of[(name, i)] - arch.pin_node(le, 0) for i in range(len(c.inputs))]
        for i, n in enumerate(c.inputs):
            owner[arch.pin_node(le, pins[i])] = n
        if c.kind is CellKind.FF:
            owner[arch.ff_node(le)] = c.output
            cfg[arch.ff_bit[le]] = c.init & 1
            cfg[arch.dsel_bit[le]] = 1
            cfg[arch.osel_bit[le]] = 1
        else:
            owner[arch.lut_node(le)] = c.output
            table = MAJ3_TABLE if c.kind is CellKind.MAJ3 else c.table
            t16 = expand_table(table, len(c.inputs), pins)
            base = arch.lut_bit0[le]
            for m in range(16):
                cfg[base + m] = (t16 >> m) & 1
    for name, pad in pl.pads.items():
        c = netlist.cells[name]
        if c.kind is CellKind.IBUF:
            owner[arch.po_node(pad)] = c.output
            cfg[arch.ibuf_bit[pad]] = 1
        else:
            for i, n in enumerate(c.inputs):
                owner[pin_of[(name, i)]] = n
            if len(c.inputs) == 3:
                cfg[arch.pmode_bit[pad]] = 1
    for name, r in rt.nets.items():
        for w, par in r.wires.items():
            owner[arch.wd_node(w)] = name
            owner[arch.wire_node(w)] = name
            cfg[arch.mux_bit[(arch.wd_node(w), par)]] = 1
        for p, par in r.pins.items():
            cfg[arch.mux_bit[(p, par)]] = 1
    return cfg, owner


def routing_from_config(arch: FabricArch, config) -> dict[int, list[int]]:
    """Selected sources of every routing/pin mux, read back from the bits."""
    cfg = np.asarray(config)
    out = {}
    for mux, ins in arch.mux_inputs.items():
        sel = [src for src, bit in ins if cfg[bit]]
        if sel:
            out[mux] = sel
    return out


def audit_implementation(impl: Implementation) -> list[str]:
    """Router legality plus configuration consistency (empty when legal)."""
    arch = impl.arch
    problems = audit_routing(impl.netlist, arch, impl.placement, impl.routing)
    problems += [f"cell {c} outside its floorplan band" for c in audit_floorplan(impl.netlist, arch, impl.placement)]
    decoded = routing_from_config(arch, impl.config)
    expected = {}
    for r in impl.routing.nets.values():
        for w, par in r.wires.items():
            expected[arch.wd_node(w)] = [par]
        for p, par in r.pins.items():
            expected[p] = [par]
    for mux, sel in decoded.items():
        if len(sel) > 1:
            problems.append(f"mux {arch.node_name(mux)} has {len(sel)} selected inputs")
    if decoded != expected:
        problems.append("configuration does not decode to the routing trees")
    return problems


def cross_domain_pairs(impl: Implementation) -> int:
    """Cross-points whose two wires carry nets of different redundancy domains."""
    arch, owner, dom = impl.arch, impl.owner, impl.net_domain
    n = 0
    for a, b, _ in arch.xpoints:
        na, nb = owner.get(arch.wire_node(a)), owner.get(arch.wire_node(b))
        if na is None or nb is None:
            continue
        da, db = dom.get(na), dom.get(nb)
        if da is not None and db is not None and da != db:
            n += 1
    return n


def implement(netlist: Netlist, arch: FabricArch | None = None, floorplan: bool = False) -> Implementation:
    arch = arch or make_arch()
    bad = validate(netlist)
    if bad:
        raise ValueError(f"invalid netlist: {[str(v) for v in bad[:3]]}")
    pl = place(netlist, arch, floorplan=floorplan)
    rt = route(netlist, arch, pl)
    cfg, owner = emit_config(netlist, arch, pl, rt)
    return Implementation(netlist, arch, pl, rt, cfg, owner, floorplan)
