"""Greedy deterministic placement.

Logic cells (LUT, MAJ3, FF) each take one logic element; pads take I/O
sites on the perimeter. Cells are visited in dependency order and dropped
into the free slot nearest the centroid of their already-placed fanins.

Block annotations steer locality: cells of the same pipeline stage (one
register, multiplier and adder, plus the voters on their nets) share a
strip of the region, strips laid out in stage order and sized by cell
count. With a floorplan, the columns are cut into narrow stripes dealt out
round-robin to D0, D1, D2, and every cell tagged D<i> stays inside the
stripes of domain i. Interleaving keeps the voter traffic between domains
local; three wide bands would force every voted signal across one long cut.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..fabric.arch import FabricArch
from ..netlist.ir import CellKind, Domain, Netlist

LOGIC_KINDS = (CellKind.LUT, CellKind.MAJ3, CellKind.FF)


class PlacementError(ValueError):
    pass


@dataclass
class Placement:
    les: dict[str, int] = field(default_factory=dict)  # cell -> LE index
    pads: dict[str, int] = field(default_factory=dict)  # IBUF/OBUF cell -> pad index
    regions: dict[str, tuple[tuple[int, int], ...]] | None = None  # domain -> [col_lo, col_hi) stripes

    def tile_of(self, arch: FabricArch, cell: str) -> int:
        if cell in self.les:
            return self.les[cell] // arch.L
        return int(arch.pad_tile[self.pads[cell]])

    def to_dict(self) -> dict:
        return {"les": self.les, "pads": self.pads, "regions": self.regions}

    @classmethod
    def from_dict(cls, d: dict) -> "Placement":
        regions = d.get("regions")
        if regions is not None:
            regions = {k: tuple(tuple(r) for r in v) for k, v in regions.items()}
        return cls(dict(d["les"]), dict(d["pads"]), regions)


STRIPE_WIDTH = 5


def floorplan_regions(arch: FabricArch, stripe: int = STRIPE_WIDTH) -> dict[str, tuple[tuple[int, int], ...]]:
    """Column stripes per domain, dealt round-robin from the west edge."""
    if arch.cols < 3:
        raise PlacementError("floorplan needs at least three columns")
    n = max(3, 3 * round(arch.cols / (3 * stripe)))
    cuts = [round(i * arch.cols / n) for i in range(n + 1)]
    out: dict[str, list] = {Domain.of(i).value: [] for i in range(3)}
    for j in range(n):
        out[Domain.of(j % 3).value].append((cuts[j], cuts[j + 1]))
    return {k: tuple(v) for k, v in out.items()}


def _region_cols(region) -> list[int]:
    return [c for lo, hi in region for c in range(lo, hi)]


def _cell_region(cell, regions):
    if regions is None or cell.domain is None or cell.domain.value not in regions:
        return None
    return regions[cell.domain.value]


def stage_of(netlist: Netlist) -> dict[str, int]:
    """Pipeline stage of each logic cell from block annotations (-1: none)."""
    idx = {b: m.get("index", -1) for b, m in netlist.blocks.items() if m.get("kind") in ("reg", "mult", "add")}
    nets = netlist.nets
    out = {}
    for c in netlist:
        blk = c.block or ""
        if blk.startswith("vote:"):
            from ..tmr import domain_name

            drv = nets.get(domain_name(blk[5:], 0))
            blk = netlist.cells[drv.driver].block if drv and drv.driver in netlist.cells else ""
        out[c.name] = idx.get(blk, -1)
    return out


def _strips(rows: int, cols: list[int], sizes: list[int]) -> list[tuple[int, int, frozenset]]:
    """Split rows x ``cols`` into consecutive (row_lo, row_hi, columns) strips proportional to ``sizes``."""
    along_cols = len(cols) >= len(sizes)
    n = len(cols) if along_cols else rows
    total = sum(sizes) or 1
    out, acc = [], 0
    for s in sizes:
        a = round(n * acc / total)
        acc += s
        b = min(max(a + 1, round(n * acc / total)), n)
        a = min(a, n - 1)
        out.append((0, rows, frozenset(cols[a:b])) if along_cols else (a, b, frozenset(cols)))
    return out


class _SlotFinder:
    def __init__(self, arch: FabricArch):
        self.arch = arch
        self.used = [0] * arch.n_tiles

    def take(self, r0: float, c0: float, box: tuple[int, int, frozenset]) -> int:
        """Nearest slot to (r0, c0) inside ``box``; tiles fill one LE deep first."""
        a = self.arch
        br0, br1, _ = box
        r0 = min(max(int(round(r0)), br0), br1 - 1)
        c0 = min(max(int(round(c0)), 0), a.cols - 1)
        for depth in range(1, a.L + 1):
            t = self._nearest(r0, c0, box, depth)
            if t is not None:
                slot = self.used[t]
                self.used[t] += 1
                return t * a.L + slot
        return -1

    def _nearest(self, r0, c0, box, depth):
        a = self.arch
        br0, br1, cols = box
        for d in range(a.rows + a.cols):
            best = None
            for dr in range(-d, d + 1):
                r = r0 + dr
                if not br0 <= r < br1:
                    continue
                rest = d - abs(dr)
                for c in (c0 - rest, c0 + rest):
                    if c in cols:
                        t = r * a.cols + c
                        if self.used[t] < depth and (best is None or t < best):
                            best = t
            if best is not None:
                return best
        return None


def _perimeter_pads(arch: FabricArch, edge: str, region) -> list[int]:
    """Pads along one edge inside ``region``, ordered outward from its middle."""
    row = 0 if edge == "N" else arch.rows - 1
    cols = _region_cols(region) if region else list(range(arch.cols))
    mid = (cols[0] + cols[-1]) / 2
    tiles = [arch.tile_at(row, c) for c in cols]
    tiles.sort(key=lambda t: (abs(arch.tile_rc(t)[1] - mid), t))
    return [p for t in tiles for p in arch.tile_pads.get(t, [])]


def place(netlist: Netlist, arch: FabricArch, floorplan: bool = False) -> Placement:
    cells = list(netlist)
    logic = [c for c in cells if c.kind in LOGIC_KINDS]
    regions = None
    if floorplan:
        regions = floorplan_regions(arch)
        for dom, region in regions.items():
            need = sum(1 for c in logic if c.domain is not None and c.domain.value == dom)
            cap = len(_region_cols(region)) * arch.rows * arch.L
            if need > cap:
                raise PlacementError(f"domain {dom} needs {need} logic elements, band holds {cap}")
    if len(logic) > arch.n_les:
        raise PlacementError(f"{len(logic)} logic cells exceed {arch.n_les} logic elements")

    pl = Placement(regions=regions)

    # pads: inputs along the north edge, outputs along the south edge
    for kind, edge in ((CellKind.IBUF, "N"), (CellKind.OBUF, "S")):
        group: dict = {}
        for c in cells:
            if c.kind is kind:
                group.setdefault(_cell_region(c, regions), []).append(c)
        for region, members in sorted(group.items(), key=lambda kv: kv[0] or ()):
            sites = [p for p in _perimeter_pads(arch, edge, region) if p not in pl.pads.values()]
            if len(sites) < len(members):
                raise PlacementError(f"not enough {edge} pads for {len(members)} ports")
            # port order maps onto the sites sorted by column
            chosen = sorted(sites[: len(members)])
            ports = netlist.inputs if kind is CellKind.IBUF else netlist.outputs
            rank = {p: i for i, p in enumerate(ports)}
            for c, p in zip(sorted(members, key=lambda c: rank.get(c.port, 0)), chosen):
                pl.pads[c.name] = p

    try:
        order = netlist.topo_order(through_ff=True)
    except ValueError:
        order = netlist.topo_order(through_ff=False)
    nets = netlist.nets
    finder = _SlotFinder(arch)
    stage = stage_of(netlist)

    # per region: one strip per pipeline stage, sized by its cell count
    boxes: dict = {}
    by_region: dict = {}
    for c in logic:
        by_region.setdefault(_cell_region(c, regions), []).append(c)
    for region, members in by_region.items():
        cols = _region_cols(region) if region else list(range(arch.cols))
        span = (0, arch.rows, frozenset(cols))
        stages = sorted({stage[c.name] for c in members if stage[c.name] >= 0})
        sizes = [sum(1 for c in members if stage[c.name] == k) for k in stages]
        for k, box in zip(stages, _strips(arch.rows, cols, sizes)):
            boxes[(region, k)] = box
        boxes[(region, -1)] = span

    def put(c, at):
        region = _cell_region(c, regions)
        span = boxes[(region, -1)]
        le = finder.take(*at, boxes.get((region, stage[c.name]), span))
        if le < 0:
            le = finder.take(*at, span)
        if le < 0:
            raise PlacementError(f"no free logic element left for {c.name}")
        pl.les[c.name] = le

    def centroid(names):
        pts = [arch.tile_rc(pl.tile_of(arch, n)) for n in names if n in pl.les or n in pl.pads]
        if not pts:
            return None
        return sum(p[0] for p in pts) / len(pts), sum(p[1] for p in pts) / len(pts)

    deferred = []
    for name in order:
        c = netlist.cells[name]
        if c.kind not in LOGIC_KINDS:
            continue
        at = centroid([nets[n].driver for n in c.inputs])
        if at is None:
            deferred.append(c)
            continue
        put(c, at)
    # fanin-free cells (constants) sit next to their readers
    for c in deferred:
        at = centroid([s for s, _ in nets[c.output].sinks]) or ((arch.rows - 1) / 2, (arch.cols - 1) / 2)
        put(c, at)
    return pl


def audit_floorplan(netlist: Netlist, arch: FabricArch, pl: Placement) -> list[str]:
    """Cells sitting outside their domain band (empty when respected)."""
    bad = []
    if pl.regions is None:
        return bad
    for name, le in pl.les.items():
        c = netlist.cells[name]
        region = _cell_region(c, pl.regions)
        if region is None:
            continue
        col = arch.tile_rc(le // arch.L)[1]
        if not any(lo <= col < hi for lo, hi in region):
            bad.append(name)
    return sorted(bad)
