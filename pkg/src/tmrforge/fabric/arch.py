"""Island-style fabric model.

Each tile holds ``les_per_tile`` logic elements (LUT4 + FF + two CLB select
bits + four one-hot input-pin muxes), a switch box, and cross-points.
Channel wires are unidirectional, one tile long, ``channel_width`` tracks
per side. A switch-box mux drives each outgoing wire from the incoming
wires of the other three sides (same track and the track below) plus the
tile's LE and pad outputs; one configuration bit per (mux, input) pair.
Cross-points are single bidirectional bits that electrically join two
channel wires: adjacent tracks leaving the same side, and a leaving wire
with the arriving wire of the same side and track.

Perimeter tiles carry I/O pads. A pad's output (input buffer) feeds the
local switch box and local pins; a pad's three input pins each have their
own one-hot mux, and the pad either passes pin 0 or the majority of the
three pins (``maj_mode``).

Configuration bits are numbered tile by tile in row-major order with a
fixed intra-tile order; bit ``i`` lives at frame ``i // frame_size``,
offset ``i % frame_size``.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import asdict, dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

N, E, S, W = range(4)
_DELTA = {N: (-1, 0), E: (0, 1), S: (1, 0), W: (0, -1)}
SIDE_NAMES = "NESW"


def opposite(side: int) -> int:
    return (side + 2) % 4


class BitKind(enum.IntEnum):
    UNUSED = 0
    LUT = 1
    FF_INIT = 2
    CLB_MUX = 3
    PIP_MUX = 4
    PIP_XPOINT = 5


class ClbSub(enum.IntEnum):
    NONE = 0
    D_SEL = 1  # FF D from LUT (0) or pin 0 bypass (1)
    OUT_SEL = 2  # LE output from LUT (0) or FF (1)
    PIN_MUX = 3
    IBUF_EN = 4
    PAD_MODE = 5  # 0: pass pin 0, 1: majority of three pins
    PAD_PIN_MUX = 6


@dataclass(frozen=True)
class ArchParams:
    rows: int = 40
    cols: int = 60
    channel_width: int = 10
    les_per_tile: int = 2
    io_per_tile: int = 2
    frame_size: int = 64

    def check(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError("fabric needs at least one tile")
        if self.channel_width < 0:
            raise ValueError("channel_width must be >= 0")
        if self.les_per_tile < 1 or self.io_per_tile < 0:
            raise ValueError("need at least one LE per tile")
        if self.frame_size < 8 or self.frame_size % 8:
            raise ValueError("frame_size must be a positive multiple of 8")

    @classmethod
    def load(cls, path) -> "ArchParams":
        """Read parameters from a TOML or JSON file (keys = field names)."""
        text = Path(path).read_text()
        if str(path).endswith(".json"):
            data = json.loads(text)
        else:
            try:
                import tomllib
            except ModuleNotFoundError:  # python < 3.11
                import tomli as tomllib
            data = tomllib.loads(text)
        data = data.get("arch", data)
        return cls(**{k: int(v) for k, v in data.items()})


class FabricArch:
    """Fully enumerated fabric: nodes, muxes, and the bit map.

    Node ids are dense integers in fixed ranges; see the ``*_node`` helpers.
    Immutable after construction; use :func:`make_arch` to get a cached one.
    """

    def __init__(self, params: ArchParams):
        params.check()
        self.params = p = params
        self.rows, self.cols, self.W, self.L = p.rows, p.cols, p.channel_width, p.les_per_tile
        self.n_tiles = p.rows * p.cols
        self.n_les = self.n_tiles * self.L

        self._enumerate_wires()
        self._enumerate_pads()
        self._layout_nodes()
        self._enumerate_bits()

    # -- geometry ---------------------------------------------------------
    def tile_rc(self, t: int) -> tuple[int, int]:
        return divmod(t, self.cols)

    def tile_at(self, r: int, c: int) -> int:
        if 0 <= r < self.rows and 0 <= c < self.cols:
            return r * self.cols + c
        return -1

    def neighbor(self, t: int, side: int) -> int:
        r, c = self.tile_rc(t)
        dr, dc = _DELTA[side]
        return self.tile_at(r + dr, c + dc)

    def is_perimeter(self, t: int) -> bool:
        r, c = self.tile_rc(t)
        return r in (0, self.rows - 1) or c in (0, self.cols - 1)

    def _enumerate_wires(self) -> None:
        W = self.W
        self.out_wire = np.full((self.n_tiles, 4, max(W, 1)), -1, dtype=np.int64)
        src, side, track, dst = [], [], [], []
        for t in range(self.n_tiles):
            for d in range(4):
                nb = self.neighbor(t, d)
                if nb < 0:
                    continue
                for k in range(W):
                    self.out_wire[t, d, k] = len(src)
                    src.append(t)
                    side.append(d)
                    track.append(k)
                    dst.append(nb)
        self.n_wires = len(src)
        self.wire_src = np.array(src, dtype=np.int64)
        self.wire_side = np.array(side, dtype=np.int64)
        self.wire_track = np.array(track, dtype=np.int64)
        self.wire_dst = np.array(dst, dtype=np.int64)

    def in_wire(self, t: int, side: int, k: int) -> int:
        """Wire arriving at tile ``t`` through its ``side`` on track ``k``."""
        nb = self.neighbor(t, side)
        if nb < 0 or k >= self.W:
            return -1
        return int(self.out_wire[nb, opposite(side), k])

    def _enumerate_pads(self) -> None:
        pad_tile = []
        self.tile_pads: dict[int, list[int]] = {}
        for t in range(self.n_tiles):
            if self.is_perimeter(t):
                for _ in range(self.params.io_per_tile):
                    self.tile_pads.setdefault(t, []).append(len(pad_tile))
                    pad_tile.append(t)
        self.n_pads = len(pad_tile)
        self.pad_tile = np.array(pad_tile, dtype=np.int64)

    # -- nodes ------------------------------------------------------------
    def _layout_nodes(self) -> None:
        n = self.n_les
        self.LUT0 = 0
        self.FF0 = n
        self.OUT0 = 2 * n
        self.PIN0 = 3 * n
        self.WD0 = 7 * n
        self.WIRE0 = self.WD0 + self.n_wires
        self.PO0 = self.WIRE0 + self.n_wires
        self.PP0 = self.PO0 + self.n_pads
        self.PX0 = self.PP0 + 3 * self.n_pads
        self.n_nodes = self.PX0 + self.n_pads

    def lut_node(self, le: int) -> int:
        return self.LUT0 + le

    def ff_node(self, le: int) -> int:
        return self.FF0 + le

    def out_node(self, le: int) -> int:
        return self.OUT0 + le

    def pin_node(self, le: int, p: int) -> int:
        return self.PIN0 + 4 * le + p

    def wd_node(self, w: int) -> int:
        return self.WD0 + w

    def wire_node(self, w: int) -> int:
        return self.WIRE0 + w

    def po_node(self, pad: int) -> int:
        return self.PO0 + pad

    def pp_node(self, pad: int, k: int) -> int:
        return self.PP0 + 3 * pad + k

    def px_node(self, pad: int) -> int:
        return self.PX0 + pad

    def node_kind(self, node: int) -> str:
        for name, lo in (("PX", self.PX0), ("PP", self.PP0), ("PO", self.PO0), ("WIRE", self.WIRE0),
                         ("WD", self.WD0), ("PIN", self.PIN0), ("OUT", self.OUT0), ("FF", self.FF0)):
            if node >= lo:
                return name
        return "LUT"

    def node_tile(self, node: int) -> int:
        kind = self.node_kind(node)
        if kind in ("LUT", "FF", "OUT"):
            return (node % self.n_les) // self.L
        if kind == "PIN":
            return ((node - self.PIN0) // 4) // self.L
        if kind in ("WD", "WIRE"):
            return int(self.wire_src[(node - self.WD0) % self.n_wires])
        if kind == "PP":
            return int(self.pad_tile[(node - self.PP0) // 3])
        return int(self.pad_tile[(node - self.PO0) % self.n_pads])

    def node_name(self, node: int) -> str:
        kind = self.node_kind(node)
        if kind in ("LUT", "FF", "OUT"):
            le = node % self.n_les
            t, s = divmod(le, self.L)
            return f"{kind}(t{t}.le{s})"
        if kind == "PIN":
            le, p = divmod(node - self.PIN0, 4)
            t, s = divmod(le, self.L)
            return f"PIN(t{t}.le{s}.i{p})"
        if kind in ("WD", "WIRE"):
            w = (node - self.WD0) % self.n_wires
            return f"{kind}(t{self.wire_src[w]}.{SIDE_NAMES[self.wire_side[w]]}{self.wire_track[w]})"
        if kind == "PP":
            pad, k = divmod(node - self.PP0, 3)
            return f"PP(pad{pad}.i{k})"
        return f"{kind}(pad{(node - self.PO0) % self.n_pads})"

    def _tracks_for(self, q: int) -> list[int]:
        if self.W == 0:
            return []
        g = min(self.W, 4)
        return [k for k in range(self.W) if k % g == q % g]

    def _local_sources(self, t: int) -> list[int]:
        srcs = [self.out_node(t * self.L + s) for s in range(self.L)]
        srcs += [self.po_node(p) for p in self.tile_pads.get(t, [])]
        return srcs

    def _pin_sources(self, t: int, q: int) -> list[int]:
        srcs = []
        for s in range(4):
            for k in self._tracks_for(q):
                w = self.in_wire(t, s, k)
                if w >= 0:
                    srcs.append(self.wire_node(w))
        return srcs + self._local_sources(t)

    def _sb_sources(self, t: int, d: int, k: int) -> list[int]:
        srcs = []
        for s in range(4):
            if s == d:
                continue
            for kk in dict.fromkeys((k, (k - 1) % self.W)):
                w = self.in_wire(t, s, kk)
                if w >= 0:
                    srcs.append(self.wire_node(w))
        return srcs + self._local_sources(t)

    # -- bits -------------------------------------------------------------
    def _enumerate_bits(self) -> None:
        kind, sub, tile, a, b = [], [], [], [], []
        # mux node -> list of (source node, bit)
        self.mux_inputs: dict[int, list[tuple[int, int]]] = {}
        self.xpoints: list[tuple[int, int, int]] = []  # (wire a, wire b, bit)
        self.lut_bit0 = np.zeros(self.n_les, dtype=np.int64)
        self.ff_bit = np.zeros(self.n_les, dtype=np.int64)
        self.dsel_bit = np.zeros(self.n_les, dtype=np.int64)
        self.osel_bit = np.zeros(self.n_les, dtype=np.int64)
        self.ibuf_bit = np.zeros(self.n_pads, dtype=np.int64)
        self.pmode_bit = np.zeros(self.n_pads, dtype=np.int64)

        def emit(k, sb, t, x, y):
            kind.append(k)
            sub.append(sb)
            tile.append(t)
            a.append(x)
            b.append(y)
            return len(kind) - 1

        for t in range(self.n_tiles):
            for s in range(self.L):
                le = t * self.L + s
                self.lut_bit0[le] = len(kind)
                for m in range(16):
                    emit(BitKind.LUT, ClbSub.NONE, t, le, m)
                self.ff_bit[le] = emit(BitKind.FF_INIT, ClbSub.NONE, t, le, 0)
                self.dsel_bit[le] = emit(BitKind.CLB_MUX, ClbSub.D_SEL, t, le, 0)
                self.osel_bit[le] = emit(BitKind.CLB_MUX, ClbSub.OUT_SEL, t, le, 0)
                for p in range(4):
                    pin = self.pin_node(le, p)
                    self.mux_inputs[pin] = [
                        (src, emit(BitKind.CLB_MUX, ClbSub.PIN_MUX, t, pin, src))
                        for src in self._pin_sources(t, 4 * s + p)
                    ]
            for d in range(4):
                for k in range(self.W):
                    w = int(self.out_wire[t, d, k])
                    if w < 0:
                        continue
                    wd = self.wd_node(w)
                    self.mux_inputs[wd] = [
                        (src, emit(BitKind.PIP_MUX, ClbSub.NONE, t, w, src))
                        for src in self._sb_sources(t, d, k)
                    ]
            for d in range(4):
                for k in range(self.W):
                    w = int(self.out_wire[t, d, k])
                    if w < 0:
                        continue
                    if k + 1 < self.W:
                        w2 = int(self.out_wire[t, d, k + 1])
                        self.xpoints.append((w, w2, emit(BitKind.PIP_XPOINT, ClbSub.NONE, t, w, w2)))
                    w3 = self.in_wire(t, d, k)
                    if w3 >= 0:
                        self.xpoints.append((w, w3, emit(BitKind.PIP_XPOINT, ClbSub.NONE, t, w, w3)))
            for j, pad in enumerate(self.tile_pads.get(t, [])):
                self.ibuf_bit[pad] = emit(BitKind.CLB_MUX, ClbSub.IBUF_EN, t, pad, 0)
                self.pmode_bit[pad] = emit(BitKind.CLB_MUX, ClbSub.PAD_MODE, t, pad, 0)
                for m in range(3):
                    pp = self.pp_node(pad, m)
                    self.mux_inputs[pp] = [
                        (src, emit(BitKind.CLB_MUX, ClbSub.PAD_PIN_MUX, t, pp, src))
                        for src in self._pin_sources(t, 3 * j + m)
                    ]

        self.n_config_bits = len(kind)
        fs = self.params.frame_size
        self.n_frames = max(1, -(-self.n_config_bits // fs))
        self.total_bits = self.n_frames * fs
        pad_n = self.total_bits - self.n_config_bits
        self.bit_kind = np.array(kind + [BitKind.UNUSED] * pad_n, dtype=np.int8)
        self.bit_sub = np.array(sub + [0] * pad_n, dtype=np.int8)
        self.bit_tile = np.array(tile + [-1] * pad_n, dtype=np.int64)
        self.bit_a = np.array(a + [-1] * pad_n, dtype=np.int64)
        self.bit_b = np.array(b + [-1] * pad_n, dtype=np.int64)

        # reverse lookups used by routing and fault analysis
        self.mux_bit: dict[tuple[int, int], int] = {}
        self.readers_of: dict[int, list[int]] = {}
        for mux, ins in self.mux_inputs.items():
            for src, bit in ins:
                self.mux_bit[(mux, src)] = bit
                self.readers_of.setdefault(src, []).append(mux)
        self.xpoints_of: dict[int, list[tuple[int, int]]] = {}
        for wa, wb, bit in self.xpoints:
            self.xpoints_of.setdefault(wa, []).append((wb, bit))
            self.xpoints_of.setdefault(wb, []).append((wa, bit))
        self.xpoint_pair = {bit: (wa, wb) for wa, wb, bit in self.xpoints}

    # -- addressing -------------------------------------------------------
    def address(self, bit: int) -> "BitAddress":
        if not 0 <= bit < self.total_bits:
            raise IndexError(f"bit {bit} outside configuration memory")
        return BitAddress(*divmod(int(bit), self.params.frame_size))

    def bit_index(self, addr: "BitAddress") -> int:
        fs = self.params.frame_size
        if not (0 <= addr.offset < fs and 0 <= addr.frame < self.n_frames):
            raise IndexError(f"{addr} outside configuration memory")
        return addr.frame * fs + addr.offset

    def describe_bit(self, bit: int) -> str:
        k = BitKind(int(self.bit_kind[bit]))
        sb = ClbSub(int(self.bit_sub[bit]))
        x, y = int(self.bit_a[bit]), int(self.bit_b[bit])
        if k is BitKind.LUT:
            return f"LUT t{self.bit_tile[bit]}.le{x % self.L} m{y}"
        if k is BitKind.FF_INIT:
            return f"FF_INIT t{self.bit_tile[bit]}.le{x % self.L}"
        if k is BitKind.CLB_MUX:
            if sb in (ClbSub.PIN_MUX, ClbSub.PAD_PIN_MUX):
                return f"{sb.name} {self.node_name(x)} <- {self.node_name(y)}"
            return f"{sb.name} {'pad' if sb in (ClbSub.IBUF_EN, ClbSub.PAD_MODE) else 'le'}{x}"
        if k is BitKind.PIP_MUX:
            return f"PIP_MUX {self.node_name(self.wire_node(x))} <- {self.node_name(y)}"
        if k is BitKind.PIP_XPOINT:
            return f"PIP_XPOINT {self.node_name(self.wire_node(x))} <-> {self.node_name(self.wire_node(y))}"
        return "UNUSED"

    @property
    def hash(self) -> str:
        blob = json.dumps(asdict(self.params), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def kind_counts(self) -> dict[str, int]:
        counts = np.bincount(self.bit_kind.astype(np.int64), minlength=len(BitKind))
        return {k.name: int(counts[k]) for k in BitKind}

    def routing_fraction(self) -> float:
        c = self.kind_counts()
        routing = c["PIP_MUX"] + c["PIP_XPOINT"]
        return routing / max(1, self.n_config_bits)


@dataclass(frozen=True, order=True)
class BitAddress:
    frame: int
    offset: int

    def __str__(self) -> str:
        return f"{self.frame}:{self.offset}"

    @classmethod
    def parse(cls, text: str) -> "BitAddress":
        f, o = text.split(":")
        return cls(int(f), int(o))


@lru_cache(maxsize=8)
def _cached(params: ArchParams) -> FabricArch:
    return FabricArch(params)


def make_arch(params: ArchParams | None = None, **kw) -> FabricArch:
    """Build (or fetch the cached) fabric for ``params``."""
    if params is None:
        params = ArchParams(**kw)
    elif kw:
        params = ArchParams(**{**asdict(params), **kw})
    return _cached(params)
