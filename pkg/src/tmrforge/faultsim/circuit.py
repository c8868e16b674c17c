"""Electrical view of a configured fabric.

Every fabric node gets a definition ``(kind, inputs, param)`` derived from
the configuration bits alone, so a single flipped bit only redefines a
handful of nodes. Traces are evaluated for all cycles at once: FFs are
one-cycle delays, so a feed-forward design is a DAG over (node, time).
"""

from __future__ import annotations

import numpy as np

from ..fabric.arch import FabricArch
from ..netlist.ir import MAJ3_TABLE
from .logic import RESOLVE_FLAT, X, Z, kleene_table, lut_eval_arrays

CONST, BUF, RES, LUT, FF, EXT = range(6)


class Definer:
    """Node definitions for one configuration (a bit list for fast lookup)."""

    def __init__(self, arch: FabricArch, cfg, ext_pads: dict[int, int]):
        self.arch = arch
        self.cfg = cfg if isinstance(cfg, list) else np.asarray(cfg).tolist()
        self.ext = ext_pads  # pad -> stimulus column

    def group(self, w: int) -> list[int]:
        """Wires electrically joined to ``w`` by enabled cross-points."""
        a, cfg = self.arch, self.cfg
        seen = [w]
        stack = [w]
        mark = {w}
        while stack:
            u = stack.pop()
            for v, bit in a.xpoints_of.get(u, ()):
                if cfg[bit] and v not in mark:
                    mark.add(v)
                    seen.append(v)
                    stack.append(v)
        return sorted(seen)

    def mux(self, node: int):
        sel = [src for src, bit in self.arch.mux_inputs.get(node, ()) if self.cfg[bit]]
        if not sel:
            return (CONST, (), Z)
        if len(sel) == 1:
            return (BUF, (sel[0],), None)
        return (RES, tuple(sel), None)

    def define(self, node: int):
        a, cfg = self.arch, self.cfg
        if node < a.FF0:
            le = node
            base = int(a.lut_bit0[le])
            table = 0
            for m in range(16):
                table |= cfg[base + m] << m
            if table == 0 or table == 0xFFFF:
                return (CONST, (), table & 1)
            return (LUT, tuple(a.pin_node(le, p) for p in range(4)), table)
        if node < a.OUT0:
            le = node - a.FF0
            d = a.pin_node(le, 0) if cfg[a.dsel_bit[le]] else a.lut_node(le)
            return (FF, (d,), cfg[a.ff_bit[le]])
        if node < a.PIN0:
            le = node - a.OUT0
            return (BUF, (a.ff_node(le) if cfg[a.osel_bit[le]] else a.lut_node(le),), None)
        if node < a.WD0:
            return self.mux(node)
        if node < a.WIRE0:
            return self.mux(node)
        if node < a.PO0:
            w = node - a.WIRE0
            g = self.group(w)
            if len(g) == 1:
                return (BUF, (a.wd_node(w),), None)
            return (RES, tuple(a.wd_node(u) for u in g), None)
        if node < a.PP0:
            pad = node - a.PO0
            if cfg[a.ibuf_bit[pad]] and pad in self.ext:
                return (EXT, (), self.ext[pad])
            return (CONST, (), Z)
        if node < a.PX0:
            return self.mux(node)
        pad = node - a.PX0
        if cfg[a.pmode_bit[pad]]:
            return (LUT, tuple(a.pp_node(pad, k) for k in range(3)), MAJ3_TABLE)
        # a one-input buffer LUT, so a floating pin reads X like any other gate input
        return (LUT, (a.pp_node(pad, 0),), 0b10)


class Evaluator:
    """Vectorised evaluation of node definitions over a trace of T cycles."""

    def __init__(self, stimuli: np.ndarray):
        self.stim = np.ascontiguousarray(np.asarray(stimuli, dtype=np.uint8).T)  # (inputs, T)
        self.T = self.stim.shape[1]
        self.const = [np.full(self.T, v, dtype=np.uint8) for v in range(4)]
        for c in self.const:
            c.setflags(write=False)

    def full(self, d, get) -> np.ndarray:
        kind, ins, param = d
        if kind == BUF:
            return get(ins[0])
        if kind == CONST:
            return self.const[param]
        if kind == RES:
            out = get(ins[0])
            for i in ins[1:]:
                out = RESOLVE_FLAT[out * 4 + get(i)]
            return out
        if kind == LUT:
            return lut_eval_arrays(kleene_table(param, len(ins)), [get(i) for i in ins])
        if kind == FF:
            dv = get(ins[0])
            out = np.empty(self.T, dtype=np.uint8)
            out[0] = param
            np.minimum(dv[:-1], X, out=out[1:])
            return out
        return self.stim[param]

    def at(self, d, get, idx: np.ndarray) -> np.ndarray:
        """Values of a node at cycles ``idx`` only."""
        kind, ins, param = d
        if kind == BUF:
            return get(ins[0])[idx]
        if kind == CONST:
            return np.full(idx.size, param, dtype=np.uint8)
        if kind == RES:
            out = get(ins[0])[idx]
            for i in ins[1:]:
                out = RESOLVE_FLAT[out * 4 + get(i)[idx]]
            return out
        if kind == LUT:
            return lut_eval_arrays(kleene_table(param, len(ins)), [get(i)[idx] for i in ins])
        if kind == FF:
            dv = get(ins[0])
            prev = np.maximum(idx - 1, 0)
            out = np.minimum(dv[prev], X)
            out[idx == 0] = param
            return out.astype(np.uint8)
        return self.stim[param][idx]


class Circuit:
    """All node definitions of a configuration plus a topological order."""

    def __init__(self, arch: FabricArch, config, ext_pads: dict[int, int]):
        self.arch = arch
        self.definer = Definer(arch, config, ext_pads)
        n = arch.n_nodes
        define = self.definer.define
        self.defs = [define(v) for v in range(n)]
        fanout: list[list[int]] = [[] for _ in range(n)]
        indeg = [0] * n
        for v, (_, ins, _) in enumerate(self.defs):
            indeg[v] = len(ins)
            for i in ins:
                fanout[i].append(v)
        self.fanout = fanout
        order = [v for v in range(n) if indeg[v] == 0]
        i = 0
        while i < len(order):
            u = order[i]
            i += 1
            for v in fanout[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    order.append(v)
        self.acyclic = len(order) == n
        self.order = order
        self.topo = np.full(n, n, dtype=np.int64)
        self.topo[np.array(order, dtype=np.int64)] = np.arange(len(order))

    def evaluate(self, ev: Evaluator) -> list:
        vals = [None] * self.arch.n_nodes
        get = vals.__getitem__
        if self.acyclic:
            for v in self.order:
                vals[v] = ev.full(self.defs[v], get)
            return vals
        return least_fixpoint(self, ev, range(self.arch.n_nodes), vals, self.defs.__getitem__)


def least_fixpoint(circuit, ev: Evaluator, region, vals, define, fanout=None) -> list:
    """Kleene iteration from X over ``region`` (nodes outside keep ``vals``)."""
    import heapq

    region = set(region)
    fanout = fanout or circuit.fanout
    topo = circuit.topo
    xs = ev.const[X]
    for v in region:
        vals[v] = xs
    get = vals.__getitem__
    heap = [(int(topo[v]), v) for v in region]
    heapq.heapify(heap)
    queued = set(region)
    while heap:
        _, v = heapq.heappop(heap)
        queued.discard(v)
        new = ev.full(define(v), get)
        if new is vals[v] or np.array_equal(new, vals[v]):
            continue
        vals[v] = new
        for f in fanout(v) if callable(fanout) else fanout[v]:
            if f in region and f not in queued:
                queued.add(f)
                heapq.heappush(heap, (int(topo[f]), f))
    return vals
