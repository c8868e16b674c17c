"""Per-bit resource database and the programmed-bit (fault universe) query."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arch import BitAddress, BitKind, ClbSub, FabricArch


@dataclass(frozen=True)
class Resource:
    address: BitAddress
    kind: BitKind
    sub: ClbSub
    tile: int
    description: str
    programmed: bool = False
    nets: tuple[str, ...] = ()
    domains: tuple[str, ...] = ()


def _check_routed(impl) -> None:
    if impl.routing is None:
        raise ValueError("implementation is not routed")


def bit_nodes(arch: FabricArch, bit: int) -> tuple[int, ...]:
    """Fabric nodes a configuration bit touches (for ownership lookups)."""
    kind = arch.bit_kind[bit]
    a, b = int(arch.bit_a[bit]), int(arch.bit_b[bit])
    if kind == BitKind.LUT:
        return (arch.lut_node(a),)
    if kind == BitKind.FF_INIT:
        return (arch.ff_node(a),)
    if kind == BitKind.CLB_MUX:
        sub = arch.bit_sub[bit]
        if sub in (ClbSub.D_SEL, ClbSub.OUT_SEL):
            return (arch.lut_node(a), arch.ff_node(a), arch.pin_node(a, 0))
        if sub in (ClbSub.IBUF_EN, ClbSub.PAD_MODE):
            return (arch.po_node(a),) + tuple(arch.pp_node(a, k) for k in range(3))
        return (a, b)
    if kind == BitKind.PIP_MUX:
        return (arch.wire_node(a), b)
    if kind == BitKind.PIP_XPOINT:
        return (arch.wire_node(a), arch.wire_node(b))
    return ()


def touched_nets(impl, bit: int) -> tuple[str, ...]:
    nets = []
    for node in bit_nodes(impl.arch, bit):
        n = impl.owner.get(node)
        if n is not None and n not in nets:
            nets.append(n)
    return tuple(sorted(nets))


def programmed_indices(impl) -> np.ndarray:
    """Sorted flat indices of every bit whose flip can touch the design."""
    cached = getattr(impl, "_programmed", None)
    if cached is not None:
        return cached
    _check_routed(impl)
    arch = impl.arch
    owner = impl.owner
    bits: set[int] = set()
    for le, cell in impl.le_cell.items():
        bits.add(int(arch.dsel_bit[le]))
        bits.add(int(arch.osel_bit[le]))
        if arch.ff_node(le) in owner:
            bits.add(int(arch.ff_bit[le]))
        if arch.lut_node(le) in owner:
            base = int(arch.lut_bit0[le])
            bits.update(range(base, base + 16))
    for pad in impl.pad_cell:
        bits.add(int(arch.ibuf_bit[pad]))
        bits.add(int(arch.pmode_bit[pad]))
    for node in owner:
        # muxes whose output is used: every candidate bit
        for _, bit in arch.mux_inputs.get(node, ()):
            bits.add(bit)
        # muxes that could pick up a used node
        for mux in arch.readers_of.get(node, ()):
            bits.add(arch.mux_bit[(mux, node)])
        if arch.WIRE0 <= node < arch.WIRE0 + arch.n_wires:
            for _, bit in arch.xpoints_of.get(node - arch.WIRE0, ()):
                bits.add(bit)
    out = np.array(sorted(bits), dtype=np.int64)
    out.setflags(write=False)
    try:
        impl._programmed = out
    except AttributeError:
        pass
    return out


def programmed_bits(impl) -> list[BitAddress]:
    return [impl.arch.address(i) for i in programmed_indices(impl)]


class ResourceDb:
    """Address -> resource map over the whole configuration memory.

    Without an implementation every entry is unprogrammed and unowned.
    """

    def __init__(self, arch: FabricArch, impl=None):
        self.arch = arch
        self.impl = impl
        self.programmed = np.zeros(arch.total_bits, dtype=bool)
        if impl is not None:
            self.programmed[programmed_indices(impl)] = True

    def __len__(self) -> int:
        return self.arch.total_bits

    def __getitem__(self, addr: BitAddress) -> Resource:
        arch = self.arch
        i = arch.bit_index(addr)
        nets: tuple[str, ...] = ()
        doms: tuple[str, ...] = ()
        if self.impl is not None and self.programmed[i]:
            nets = touched_nets(self.impl, i)
            doms = tuple(sorted(self.impl.domains_of(nets)))
        return Resource(
            addr, BitKind(int(arch.bit_kind[i])), ClbSub(int(arch.bit_sub[i])), int(arch.bit_tile[i]),
            arch.describe_bit(i), bool(self.programmed[i]), nets, doms,
        )

    def __iter__(self):
        for i in range(self.arch.total_bits):
            yield self[self.arch.address(i)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ResourceDb):
            return NotImplemented
        a, b = self.arch, other.arch
        return (
            a.hash == b.hash
            and np.array_equal(a.bit_kind, b.bit_kind)
            and np.array_equal(a.bit_sub, b.bit_sub)
            and np.array_equal(a.bit_a, b.bit_a)
            and np.array_equal(a.bit_b, b.bit_b)
            and np.array_equal(self.programmed, other.programmed)
        )


ROUTING_KINDS = (BitKind.PIP_MUX, BitKind.PIP_XPOINT)


@dataclass
class ResourceStats:
    les_used: int = 0
    tiles_used: int = 0
    counts: dict[str, int] = field(default_factory=lambda: {"routing": 0, "lut": 0, "ff": 0, "clb_mux": 0})

    @classmethod
    def from_counts(cls, routing=0, lut=0, ff=0, clb_mux=0, les_used=0, tiles_used=0) -> "ResourceStats":
        return cls(les_used, tiles_used, {"routing": routing, "lut": lut, "ff": ff, "clb_mux": clb_mux})

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def percentages(self) -> dict[str, float]:
        t = self.total
        return {k: (100.0 * v / t if t else 0.0) for k, v in self.counts.items()}

    @property
    def routing_share(self) -> float:
        return self.percentages["routing"]

    def approx_routing(self) -> str:
        """Routing share rounded to the nearest ten, e.g. ``~80%``."""
        return f"~{int(round(self.routing_share / 10.0)) * 10}%"

    def to_dict(self) -> dict:
        return {
            "les_used": self.les_used,
            "tiles_used": self.tiles_used,
            "counts": dict(self.counts),
            "percentages": {k: round(v, 2) for k, v in self.percentages.items()},
        }


def resource_stats(impl) -> ResourceStats:
    if impl is None:
        return ResourceStats()
    arch = impl.arch
    idx = programmed_indices(impl)
    kinds = np.bincount(arch.bit_kind[idx].astype(np.int64), minlength=len(BitKind))
    return ResourceStats.from_counts(
        routing=int(kinds[BitKind.PIP_MUX] + kinds[BitKind.PIP_XPOINT]),
        lut=int(kinds[BitKind.LUT]),
        ff=int(kinds[BitKind.FF_INIT]),
        clb_mux=int(kinds[BitKind.CLB_MUX]),
        les_used=len(impl.le_cell),
        tiles_used=len({le // arch.L for le in impl.le_cell}),
    )
