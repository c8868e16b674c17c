"""Two-valued cycle-accurate netlist simulation.

Feed-forward designs (no loop even through flip-flops) are simulated a whole
trace at a time: each net holds one uint8 array over all cycles and a
flip-flop is a one-cycle shift of its D array. Designs with registered
feedback fall back to a per-cycle loop.
"""

from __future__ import annotations

import heapq
from typing import Mapping, Sequence

import numpy as np

from .fir import wrap
from .ir import CellKind, Netlist


def words_to_bits(words: Sequence[int], width: int) -> np.ndarray:
    """(cycles,) signed words -> (cycles, width) bit matrix, LSB first."""
    w = np.asarray(words, dtype=np.int64) & ((1 << width) - 1)
    return ((w[:, None] >> np.arange(width)) & 1).astype(np.uint8)


def bits_to_words(bits: np.ndarray, signed: bool = True) -> list[int]:
    bits = np.asarray(bits, dtype=np.int64)
    width = bits.shape[1]
    vals = (bits << np.arange(width)).sum(axis=1)
    if signed:
        return [wrap(int(v), width) for v in vals]
    return [int(v) for v in vals]


def _lut_vector(table: int, k: int) -> np.ndarray:
    return np.array([(table >> m) & 1 for m in range(1 << k)], dtype=np.uint8)


_MAJ = _lut_vector(0b11101000, 3)


class NetlistSim:
    """Reusable simulator for one netlist.

    ``force`` maps a cell name to "0", "1" or "inv" and overrides that
    cell's output on every cycle. ``flips`` lists (ff_name, cycle) pairs that
    invert a flip-flop's stored state for that one cycle.
    """

    def __init__(self, netlist: Netlist):
        self.netlist = netlist
        self.comb_order = netlist.topo_order(through_ff=False)
        try:
            self.order = netlist.topo_order(through_ff=True)
            self.feed_forward = True
        except ValueError:
            self.order = self.comb_order
            self.feed_forward = False
        self.index = {name: i for i, name in enumerate(self.order)}
        nets = netlist.nets
        self.readers: dict[str, list[str]] = {}
        for c in netlist:
            if c.output is not None:
                self.readers[c.name] = sorted(
                    {s for s, _ in nets[c.output].sinks}, key=self.index.__getitem__
                )
        self._luts = {
            c.name: _lut_vector(c.table, len(c.inputs))
            for c in netlist if c.kind is CellKind.LUT
        }
        self.golden: dict[str, np.ndarray] | None = None
        self._golden_out: np.ndarray | None = None

    # -- evaluation -------------------------------------------------------
    def _eval(self, name: str, val: Mapping[str, np.ndarray], port_vals, cycles: int) -> np.ndarray:
        c = self.netlist.cells[name]
        k = c.kind
        if k is CellKind.IBUF:
            return port_vals[c.port]
        if k is CellKind.FF:
            d = val[c.inputs[0]]
            out = np.empty(cycles, dtype=np.uint8)
            out[0] = c.init
            out[1:] = d[:-1]
            return out
        ins = [val[n] for n in c.inputs]
        if k is CellKind.LUT:
            if not ins:
                return np.full(cycles, c.table & 1, dtype=np.uint8)
            idx = ins[0].astype(np.intp)
            for i, a in enumerate(ins[1:], 1):
                idx = idx | (a.astype(np.intp) << i)
            return self._luts[name][idx]
        if k is CellKind.MAJ3 or len(ins) == 3:
            return _MAJ[ins[0].astype(np.intp) | (ins[1].astype(np.intp) << 1) | (ins[2].astype(np.intp) << 2)]
        return ins[0]

    @staticmethod
    def _apply_force(arr: np.ndarray, mode: str) -> np.ndarray:
        if mode == "0":
            return np.zeros_like(arr)
        if mode == "1":
            return np.ones_like(arr)
        if mode == "inv":
            return arr ^ 1
        raise ValueError(f"unknown force mode {mode!r}")

    def _port_values(self, stimuli: np.ndarray, cycles: int) -> dict[str, np.ndarray]:
        stimuli = np.asarray(stimuli, dtype=np.uint8)
        if stimuli.ndim != 2 or stimuli.shape[1] != len(self.netlist.inputs):
            raise ValueError(
                f"stimulus width {stimuli.shape[-1] if stimuli.ndim else 0} != {len(self.netlist.inputs)} inputs"
            )
        if stimuli.shape[0] < cycles:
            raise ValueError("fewer stimulus rows than cycles")
        return {p: np.ascontiguousarray(stimuli[:cycles, i]) for i, p in enumerate(self.netlist.inputs)}

    def run(self, stimuli, cycles: int | None = None, force=None, flips=(), return_nets: bool = False):
        stimuli = np.asarray(stimuli, dtype=np.uint8)
        cycles = stimuli.shape[0] if cycles is None else cycles
        ports = self._port_values(stimuli, cycles)
        force = force or {}
        flips_by = {}
        for ff, t in flips:
            flips_by.setdefault(ff, []).append(t)
        if self.feed_forward:
            val = self._run_vector(ports, cycles, force, flips_by)
        else:
            val = self._run_cycles(ports, cycles, force, flips_by)
        outs = self._outputs(val, cycles)
        return (outs, val) if return_nets else outs

    def _run_vector(self, ports, cycles, force, flips_by) -> dict[str, np.ndarray]:
        val: dict[str, np.ndarray] = {}
        cells = self.netlist.cells
        for name in self.order:
            c = cells[name]
            if c.output is None:
                continue
            v = self._eval(name, val, ports, cycles)
            if name in flips_by:
                v = v.copy()
                for t in flips_by[name]:
                    v[t] ^= 1
            if name in force:
                v = self._apply_force(v, force[name])
            val[c.output] = v
        return val

    def _run_cycles(self, ports, cycles, force, flips_by) -> dict[str, np.ndarray]:
        cells = self.netlist.cells
        val = {c.output: np.zeros(cycles, dtype=np.uint8) for c in cells.values() if c.output}
        state = {c.name: c.init for c in cells.values() if c.kind is CellKind.FF}
        comb = [cells[n] for n in self.comb_order if cells[n].output is not None]
        for t in range(cycles):
            for c in comb:
                if c.kind is CellKind.FF:
                    v = state[c.name]
                    if t in flips_by.get(c.name, ()):
                        v ^= 1
                elif c.kind is CellKind.IBUF:
                    v = int(ports[c.port][t])
                else:
                    v = c.evaluate(tuple(int(val[n][t]) for n in c.inputs))
                mode = force.get(c.name)
                if mode is not None:
                    v = {"0": 0, "1": 1}.get(mode, v ^ 1)
                val[c.output][t] = v
            for c in comb:
                if c.kind is CellKind.FF:
                    state[c.name] = int(val[c.inputs[0]][t])
        return val

    def _outputs(self, val, cycles) -> np.ndarray:
        outs = np.zeros((cycles, len(self.netlist.outputs)), dtype=np.uint8)
        for j, c in enumerate(self.netlist.output_cells()):
            ins = [val[n] for n in c.inputs]
            if len(ins) == 3:
                outs[:, j] = _MAJ[ins[0].astype(np.intp) | (ins[1].astype(np.intp) << 1) | (ins[2].astype(np.intp) << 2)]
            else:
                outs[:, j] = ins[0]
        return outs

    # -- single-fault analysis --------------------------------------------
    def set_golden(self, stimuli, cycles: int | None = None) -> np.ndarray:
        if not self.feed_forward:
            raise ValueError("event-driven fault analysis needs a feed-forward netlist")
        out, val = self.run(stimuli, cycles, return_nets=True)
        self.golden = val
        self._stim = np.asarray(stimuli, dtype=np.uint8)
        self._cycles = out.shape[0]
        self._golden_out = out
        return out

    def forced_outputs(self, cell: str, mode: str) -> np.ndarray:
        """Outputs with one cell forced, re-evaluating only the changed cone."""
        assert self.golden is not None, "call set_golden first"
        cells = self.netlist.cells
        c = cells[cell]
        if c.output is None:
            # forcing an output buffer changes its port directly
            out = self._golden_out.copy()
            j = self.netlist.outputs.index(c.port)
            out[:, j] = self._apply_force(out[:, j], mode)
            return out
        cur: dict[str, np.ndarray] = {}
        v = self._apply_force(self.golden[c.output], mode)
        if np.array_equal(v, self.golden[c.output]):
            return self._golden_out
        cur[c.output] = v
        view = _Overlay(cur, self.golden)
        heap = [(self.index[r], r) for r in self.readers[cell]]
        heapq.heapify(heap)
        seen = set()
        touched_obuf = False
        while heap:
            _, name = heapq.heappop(heap)
            if name in seen:
                continue
            seen.add(name)
            rc = cells[name]
            if rc.output is None:
                touched_obuf = True
                continue
            nv = self._eval(name, view, None, self._cycles)
            if np.array_equal(nv, self.golden[rc.output]):
                continue
            cur[rc.output] = nv
            for r in self.readers[name]:
                if r not in seen:
                    heapq.heappush(heap, (self.index[r], r))
        if not touched_obuf:
            return self._golden_out
        return self._outputs(view, self._cycles)


class _Overlay(dict):
    def __init__(self, cur, base):
        super().__init__()
        self.cur, self.base = cur, base

    def __getitem__(self, k):
        v = self.cur.get(k)
        return self.base[k] if v is None else v


def simulate_netlist(netlist: Netlist, stimuli, cycles: int | None = None, **kw) -> np.ndarray:
    """Per-cycle output bit vectors for per-cycle input bit vectors."""
    return NetlistSim(netlist).run(stimuli, cycles, **kw)
