"""Negotiated-congestion maze router.

Nets are routed one at a time in id order; each sink is reached by an A*
search over channel wires seeded from the net's partial tree. Wires used
by more than one net are penalised (present + history cost) and the
offending nets are ripped up and re-routed, for a bounded number of
iterations. Cross-points are never used.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field

from ..fabric.arch import FabricArch
from ..netlist.ir import CellKind, Netlist
from .place import Placement

MAX_ITERATIONS = 30
log = logging.getLogger(__name__)


class Unroutable(RuntimeError):
    def __init__(self, message: str, congested: list[int] | None = None):
        super().__init__(message)
        self.congested = congested or []


@dataclass
class NetRoute:
    source: int  # fabric node driving the net
    wires: dict[int, int] = field(default_factory=dict)  # wire -> parent node
    pins: dict[int, int] = field(default_factory=dict)  # sink pin node -> parent node
    sinks: dict[tuple[str, int], int] = field(default_factory=dict)  # (cell, input) -> pin node


@dataclass
class Routing:
    nets: dict[str, NetRoute] = field(default_factory=dict)
    iterations: int = 0

    def wire_owner(self) -> dict[int, str]:
        return {w: n for n, r in self.nets.items() for w in r.wires}

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "nets": {
                n: {
                    "source": r.source,
                    "wires": sorted(r.wires.items()),
                    "pins": sorted(r.pins.items()),
                    "sinks": sorted([c, i, p] for (c, i), p in r.sinks.items()),
                }
                for n, r in self.nets.items()
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Routing":
        nets = {
            n: NetRoute(
                v["source"],
                {int(a): int(b) for a, b in v["wires"]},
                {int(a): int(b) for a, b in v["pins"]},
                {(c, int(i)): int(p) for c, i, p in v["sinks"]},
            )
            for n, v in d["nets"].items()
        }
        return cls(nets, d.get("iterations", 0))


class _Graph:
    """Wire adjacency in plain lists, built once per architecture."""

    def __init__(self, arch: FabricArch):
        self.arch = arch
        nw = arch.n_wires
        self.next: list[list[int]] = [[] for _ in range(nw)]
        self.src_wires: dict[int, list[int]] = {}
        self.feeders: dict[int, tuple[list[int], set[int]]] = {}
        wd0, w0 = arch.WD0, arch.WIRE0
        for mux, ins in arch.mux_inputs.items():
            if wd0 <= mux < w0:
                w = mux - wd0
                for src, _ in ins:
                    if w0 <= src < w0 + nw:
                        self.next[src - w0].append(w)
                    else:
                        self.src_wires.setdefault(src, []).append(w)
            else:
                wires = [s - w0 for s, _ in ins if w0 <= s < w0 + nw]
                local = {s for s, _ in ins if not w0 <= s < w0 + nw}
                self.feeders[mux] = (wires, local)
        for lst in self.next:
            lst.sort()
        self.dst_r = [int(arch.wire_dst[w]) // arch.cols for w in range(nw)]
        self.dst_c = [int(arch.wire_dst[w]) % arch.cols for w in range(nw)]


_graphs: dict[int, _Graph] = {}


def routing_graph(arch: FabricArch) -> _Graph:
    g = _graphs.get(id(arch))
    if g is None or g.arch is not arch:
        g = _graphs[id(arch)] = _Graph(arch)
    return g


def net_terminals(netlist: Netlist, arch: FabricArch, pl: Placement) -> dict[str, tuple[int, list[tuple[str, int, tuple[int, ...]]]]]:
    """net -> (source node, sinks) where each sink is (cell, input, candidate pins).

    LUT and MAJ3 inputs are logically equivalent, so any of the four pins of
    the hosting logic element may take them (the truth table is permuted to
    match). FF data and pad inputs have a single fixed pin.
    """
    out = {}
    for name, net in sorted(netlist.nets.items()):
        if not net.sinks:
            continue
        drv = netlist.cells[net.driver]
        src = arch.out_node(pl.les[drv.name]) if drv.kind is not CellKind.IBUF else arch.po_node(pl.pads[drv.name])
        sinks = []
        for cell, pin in sorted(net.sinks):
            c = netlist.cells[cell]
            if c.kind is CellKind.OBUF:
                cands = (arch.pp_node(pl.pads[cell], pin),)
            elif c.kind is CellKind.FF:
                cands = (arch.pin_node(pl.les[cell], 0),)
            else:
                cands = tuple(arch.pin_node(pl.les[cell], p) for p in range(4))
            sinks.append((cell, pin, cands))
        out[name] = (src, sinks)
    return out


def _route_net(g: _Graph, src: int, sinks, cost, pin_cost) -> NetRoute:
    arch = g.arch
    w0, nw = arch.WIRE0, arch.n_wires
    route = NetRoute(src)
    sr, sc = divmod(arch.node_tile(src), arch.cols)
    dr, dc = g.dst_r, g.dst_c

    def sink_key(s):
        r, c = divmod(arch.node_tile(s[2][0]), arch.cols)
        return (abs(r - sr) + abs(c - sc), s[2][0], s[1])

    for cell, idx, cands in sorted(sinks, key=sink_key):
        tr, tc = divmod(arch.node_tile(cands[0]), arch.cols)
        feed: dict[int, list[int]] = {}
        heap = []
        best: dict[int, float] = {}
        parent: dict[int, int] = {}

        def push_pin(p, gc, par):
            key = -1 - p
            pc = gc + pin_cost(p)
            if pc < best.get(key, 1e30):
                best[key] = pc
                parent[key] = par
                heapq.heappush(heap, (pc, pc, key))

        for p in cands:
            if p in route.pins:
                continue
            wires, local = g.feeders[p]
            if src in local:
                push_pin(p, 0.0, src)
            for w in wires:
                if w in route.wires:
                    push_pin(p, 0.0, w0 + w)
                feed.setdefault(w, []).append(p)
        seeds = [(w, src) for w in g.src_wires.get(src, ())]
        for t in sorted(route.wires):
            seeds.extend((w, w0 + t) for w in g.next[t])
        for w, par in seeds:
            if w in route.wires:
                continue
            gc = cost[w]
            if gc < best.get(w, 1e30):
                best[w] = gc
                parent[w] = par
                heapq.heappush(heap, (gc + abs(dr[w] - tr) + abs(dc[w] - tc), gc, w))
        found = None
        while heap:
            f, gc, key = heapq.heappop(heap)
            if gc > best.get(key, 1e30):
                continue
            if key < 0:
                found = -1 - key
                break
            w = key
            for p in feed.get(w, ()):
                push_pin(p, gc, w0 + w)
            for n in g.next[w]:
                if n in route.wires:
                    continue
                ng = gc + cost[n]
                if ng < best.get(n, 1e30):
                    best[n] = ng
                    parent[n] = w0 + w
                    heapq.heappush(heap, (ng + abs(dr[n] - tr) + abs(dc[n] - tc), ng, n))
        if found is None:
            raise Unroutable(f"no path to {cell} input {idx} from {arch.node_name(src)}")
        par = parent[-1 - found]
        route.pins[found] = par
        route.sinks[(cell, idx)] = found
        while par != src and w0 <= par < w0 + nw:
            w = par - w0
            if w in route.wires:
                break
            par = parent[w]
            route.wires[w] = par
    return route


def route(netlist: Netlist, arch: FabricArch, placement: Placement, max_iterations: int = MAX_ITERATIONS) -> Routing:
    g = routing_graph(arch)
    terms = net_terminals(netlist, arch, placement)
    nw = arch.n_wires
    occ = [0] * nw
    hist = [0.0] * nw
    pin_occ: dict[int, int] = {}
    pin_hist: dict[int, float] = {}
    fac = [0.5]
    routes: dict[str, NetRoute] = {}
    order = sorted(terms)

    def wcost(w):
        return (1.0 + hist[w]) * (1.0 + fac[0] * occ[w])

    def pin_cost(p):
        return (1.0 + pin_hist.get(p, 0.0)) * (1.0 + fac[0] * pin_occ.get(p, 0))

    dirty = set(order)
    best_over, stall = None, 0
    for it in range(1, max_iterations + 1):
        cost = [wcost(w) for w in range(nw)]
        for name in order:
            if name not in dirty:
                continue
            old = routes.pop(name, None)
            if old is not None:
                for w in old.wires:
                    occ[w] -= 1
                    cost[w] = wcost(w)
                for p in old.pins:
                    pin_occ[p] -= 1
            src, sinks = terms[name]
            r = _route_net(g, src, sinks, cost, pin_cost)
            routes[name] = r
            for w in r.wires:
                occ[w] += 1
                cost[w] = wcost(w)
            for p in r.pins:
                pin_occ[p] = pin_occ.get(p, 0) + 1
        over = [w for w in range(nw) if occ[w] > 1]
        over_pins = sorted(p for p, o in pin_occ.items() if o > 1)
        log.info("iteration %d: rerouted %d nets, %d shared wires, %d shared pins",
                 it, len(dirty), len(over), len(over_pins))
        if not over and not over_pins:
            return Routing({n: routes[n] for n in order}, it)
        for w in over:
            hist[w] += 0.3 * (occ[w] - 1)
        for p in over_pins:
            pin_hist[p] = pin_hist.get(p, 0.0) + 0.3 * (pin_occ[p] - 1)
        fac[0] *= 1.8
        overset, overpins = set(over), set(over_pins)
        n_over = len(over) + len(over_pins)
        if best_over is None or n_over < best_over:
            best_over, stall = n_over, 0
        else:
            stall += 1
        if stall >= 2:
            # stuck: also rip up everything passing near the hot spots
            overset = _neighbourhood(arch, over, over_pins, radius=2)
            stall = 0
        dirty = {
            n for n, r in routes.items()
            if not overset.isdisjoint(r.wires) or not overpins.isdisjoint(r.pins)
        }
    raise Unroutable(
        f"{len(over)} wires and {len(over_pins)} pins still shared after {max_iterations} iterations",
        congested=sorted(over),
    )


def _neighbourhood(arch: FabricArch, wires, pins, radius: int) -> set[int]:
    """All wires leaving tiles within ``radius`` of a congested wire or pin."""
    hot = {int(arch.wire_src[w]) for w in wires} | {arch.node_tile(p) for p in pins}
    tiles = set()
    for t in hot:
        r, c = divmod(t, arch.cols)
        for rr in range(max(0, r - radius), min(arch.rows, r + radius + 1)):
            for cc in range(max(0, c - radius), min(arch.cols, c + radius + 1)):
                tiles.add(rr * arch.cols + cc)
    out = arch.out_wire
    return {int(w) for t in tiles for w in out[t].ravel() if w >= 0}


def audit_routing(netlist: Netlist, arch: FabricArch, placement: Placement, routing: Routing) -> list[str]:
    """Legality problems of a routing: shared wires, broken trees, missed sinks."""
    problems = []
    owner: dict[int, str] = {}
    pin_owner: dict[int, str] = {}
    for name, r in routing.nets.items():
        for w in r.wires:
            if w in owner:
                problems.append(f"wire {arch.node_name(arch.wire_node(w))} shared by {owner[w]} and {name}")
            owner[w] = name
        for p in r.pins:
            if p in pin_owner:
                problems.append(f"pin {arch.node_name(p)} driven by {pin_owner[p]} and {name}")
            pin_owner[p] = name
    for name, (src, sinks) in net_terminals(netlist, arch, placement).items():
        r = routing.nets.get(name)
        if r is None:
            problems.append(f"net {name} unrouted")
            continue
        if r.source != src:
            problems.append(f"net {name} routed from the wrong source")
        for cell, idx, cands in sinks:
            p = r.sinks.get((cell, idx))
            if p not in cands or p not in r.pins:
                problems.append(f"net {name} misses sink {cell}:{idx}")
                continue
            node, seen = r.pins[p], set()
            if (p, node) not in arch.mux_bit:
                problems.append(f"pin {arch.node_name(p)} cannot select {arch.node_name(node)}")
            while node != src:
                w = node - arch.WIRE0
                if w in seen or w not in r.wires:
                    problems.append(f"net {name} has a broken path to {arch.node_name(p)}")
                    break
                seen.add(w)
                par = r.wires[w]
                if (arch.wd_node(w), par) not in arch.mux_bit:
                    problems.append(f"wire {w} cannot select {arch.node_name(par)}")
                    break
                node = par
    return problems
