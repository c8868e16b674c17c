"""Golden and single-upset fabric simulation.

The golden run evaluates every node once. A faulted run redefines only the
nodes the flipped bit controls and pushes differences forward in golden
topological order, touching only the cycles that actually differ and
stopping wherever a value falls back to golden. If the flip closes a loop
the forward cone is re-solved by Kleene iteration instead.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from ..fabric.arch import BitKind, ClbSub
from .circuit import BUF, FF, Circuit, Evaluator, least_fixpoint


def ext_pad_map(impl) -> dict[int, int]:
    return {pad: i for i, pad in enumerate(impl.input_pads)}


def redefined_nodes(arch, bit: int, definer) -> list[int]:
    """Fabric nodes whose definition depends on ``bit`` (cross-point groups as seen by ``definer``)."""
    kind = arch.bit_kind[bit]
    a = int(arch.bit_a[bit])
    if kind == BitKind.LUT:
        return [arch.lut_node(a)]
    if kind == BitKind.FF_INIT:
        return [arch.ff_node(a)]
    if kind == BitKind.CLB_MUX:
        sub = arch.bit_sub[bit]
        if sub == ClbSub.D_SEL:
            return [arch.ff_node(a)]
        if sub == ClbSub.OUT_SEL:
            return [arch.out_node(a)]
        if sub == ClbSub.IBUF_EN:
            return [arch.po_node(a)]
        if sub == ClbSub.PAD_MODE:
            return [arch.px_node(a)]
        return [a]
    if kind == BitKind.PIP_MUX:
        return [arch.wd_node(a)]
    if kind == BitKind.PIP_XPOINT:
        wires = set()
        for w in (a, int(arch.bit_b[bit])):
            wires.update(definer.group(w))
        return [arch.wire_node(w) for w in sorted(wires)]
    return []


@dataclass
class FaultRun:
    outputs: np.ndarray  # (T, n_outputs) four-valued trace
    changed: dict  # output index -> cycles that differ from the golden fabric run
    slow_path: bool = False
    nodes: dict = field(default_factory=dict, repr=False)  # every node trace that left golden

    @property
    def first_difference(self):
        firsts = [int(c[0]) for c in self.changed.values() if c.size]
        return min(firsts) if firsts else None


class FabricSim:
    """Golden evaluation of one implementation under one stimulus set."""

    def __init__(self, impl, stimuli):
        stimuli = np.asarray(stimuli, dtype=np.uint8)
        if stimuli.ndim != 2 or stimuli.shape[1] != len(impl.input_pads):
            raise ValueError(f"stimuli need {len(impl.input_pads)} columns")
        self.impl = impl
        self.arch = impl.arch
        self.ev = Evaluator(stimuli)
        self.T = self.ev.T
        self.circuit = Circuit(impl.arch, impl.config, ext_pad_map(impl))
        self.golden = self.circuit.evaluate(self.ev)
        self.out_nodes = [self.arch.px_node(p) for p in impl.output_pads]
        self.golden_outputs = np.stack([self.golden[v] for v in self.out_nodes], axis=1)

    def _output_trace(self, vals: dict) -> np.ndarray:
        cols = [vals.get(v, self.golden[v]) for v in self.out_nodes]
        return np.stack(cols, axis=1)

    def run(self, bit: int) -> FaultRun:
        """Simulate the design with configuration ``bit`` inverted."""
        arch, circ = self.arch, self.circuit
        old = circ.definer
        cfg = old.cfg
        D = set(redefined_nodes(arch, bit, old))
        cfg[bit] ^= 1
        try:
            D.update(redefined_nodes(arch, bit, old))
            new_defs = {v: old.define(v) for v in sorted(D)}
        finally:
            cfg[bit] ^= 1

        S = set()
        for v, d in new_defs.items():
            S.update(set(d[1]) - set(circ.defs[v][1]))
        if S and self._reaches(D, S):
            return self._slow(new_defs, S)
        return self._fast(new_defs)

    def window(self, start: int, stop: int) -> "FabricSim":
        """The same golden run restricted to cycles [start, stop)."""
        w = object.__new__(FabricSim)
        w.impl, w.arch, w.circuit = self.impl, self.arch, self.circuit
        w.ev = Evaluator(self.ev.stim.T[start:stop])
        w.T = w.ev.T
        w.golden = [g[start:stop] for g in self.golden]
        w.out_nodes = self.out_nodes
        w.golden_outputs = self.golden_outputs[start:stop]
        return w

    def ff_state(self, run: FaultRun, cycle: int) -> dict[int, int]:
        """FF values at ``cycle`` in ``run`` that differ from golden."""
        a = self.arch
        out = {}
        for v, arr in run.nodes.items():
            if a.FF0 <= v < a.OUT0 and arr[cycle] != self.golden[v][cycle]:
                out[v] = int(arr[cycle])
        return out

    def run_from_state(self, state: dict[int, int]) -> FaultRun:
        """Golden configuration started from FF ``state`` at cycle 0 of this run."""
        defs = self.circuit.defs
        new_defs = {v: (defs[v][0], defs[v][1], val) for v, val in state.items()}
        if not self.circuit.acyclic:
            return self._slow(new_defs, set())
        return self._fast(new_defs)

    def _reaches(self, D, S) -> bool:
        topo, fan = self.circuit.topo, self.circuit.fanout
        bound = max(int(topo[s]) for s in S)
        seen = set(D)
        stack = list(D)
        while stack:
            u = stack.pop()
            if u in S:
                return True
            for f in fan[u]:
                if f not in seen and topo[f] <= bound:
                    seen.add(f)
                    stack.append(f)
        return False

    def _fast(self, new_defs: dict) -> FaultRun:
        circ, ev, G = self.circuit, self.ev, self.golden
        topo, defs, fan = circ.topo, circ.defs, circ.fanout
        T = self.T
        vals: dict[int, np.ndarray] = {}

        def get(v):
            a = vals.get(v)
            return G[v] if a is None else a

        pending: dict[int, list] = {}
        heap = []
        for v in new_defs:
            pending[v] = None
            heapq.heappush(heap, (int(topo[v]), v))
        while heap:
            _, v = heapq.heappop(heap)
            dirty = pending.pop(v, 0)
            if dirty == 0:
                continue
            d = new_defs.get(v, defs[v])
            g = G[v]
            if v in new_defs:
                arr = ev.full(d, get)
                diff = np.flatnonzero(arr != g)
                if not diff.size:
                    continue
            else:
                idx = dirty[0] if len(dirty) == 1 else np.unique(np.concatenate(dirty))
                at = ev.at(d, get, idx)
                mask = at != g[idx]
                if not mask.any():
                    continue
                diff = idx[mask]
                arr = g.copy()
                arr[diff] = at[mask]
            # plain buffers copy their single input, so the same trace flows straight through
            chain = [v]
            while chain:
                u = chain.pop()
                vals[u] = arr
                shifted = None
                for f in fan[u]:
                    kind = defs[f][0]
                    if f not in new_defs:
                        if kind == BUF:
                            chain.append(f)
                            continue
                        if kind == FF:
                            if shifted is None:
                                shifted = diff + 1
                                shifted = shifted[shifted < T]
                            if not shifted.size:
                                continue
                            part = shifted
                        else:
                            part = diff
                    else:
                        part = diff
                    cur = pending.get(f, 0)
                    if cur == 0:
                        pending[f] = [part]
                        heapq.heappush(heap, (int(topo[f]), f))
                    elif cur is not None:
                        cur.append(part)
        return self._result(vals, False)

    def _slow(self, new_defs: dict, S) -> FaultRun:
        circ = self.circuit
        extra: dict[int, list[int]] = {}
        for v, d in new_defs.items():
            for s in d[1]:
                extra.setdefault(s, []).append(v)

        def fanout(v):
            return circ.fanout[v] + extra.get(v, [])

        region = set(new_defs)
        stack = list(new_defs)
        while stack:
            u = stack.pop()
            for f in fanout(u):
                if f not in region:
                    region.add(f)
                    stack.append(f)
        vals = list(self.golden)

        def define(v):
            return new_defs.get(v, circ.defs[v])

        least_fixpoint(circ, self.ev, region, vals, define, fanout)
        changed = {v: vals[v] for v in region if not np.array_equal(vals[v], self.golden[v])}
        return self._result(changed, True)

    def _result(self, vals: dict, slow: bool) -> FaultRun:
        changed = {}
        for i, v in enumerate(self.out_nodes):
            if v in vals:
                cyc = np.flatnonzero(vals[v] != self.golden[v])
                if cyc.size:
                    changed[i] = cyc
        return FaultRun(self._output_trace(vals), changed, slow, vals)


def reference_trace(impl, config, stimuli) -> np.ndarray:
    """Outputs of a full re-evaluation of ``config`` (no incremental tricks)."""
    ev = Evaluator(np.asarray(stimuli, dtype=np.uint8))
    circ = Circuit(impl.arch, config, ext_pad_map(impl))
    vals = circ.evaluate(ev)
    return np.stack([vals[impl.arch.px_node(p)] for p in impl.output_pads], axis=1)
