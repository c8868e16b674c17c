"""Injection campaigns: golden check, per-fault simulation, scrubbing."""

from __future__ import annotations

import logging
import multiprocessing
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..fabric.resources import resource_stats
from ..faultsim import FabricSim, fabric_sim
from ..faultsim.effects import FaultRecord, Verdict, _bit_index, _require_programmed, compare, describe_fault
from ..netlist.ir import CellKind
from .faultlist import FaultList
from .report import CampaignReport, DesignResult, design_label

WORKERS_ENV = "TMRFORGE_WORKERS"
log = logging.getLogger(__name__)


class GoldenIntegrityError(RuntimeError):
    """The unfaulted fabric run disagrees with the oracle."""


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def pipeline_depth(netlist) -> int:
    """Most FFs on any input-to-output path."""
    depth: dict[str, int] = {}
    nets = netlist.nets
    for name in netlist.topo_order(through_ff=True):
        c = netlist.cells[name]
        d = max((depth.get(nets[n].driver, 0) for n in c.inputs), default=0)
        depth[name] = d + (1 if c.kind is CellKind.FF else 0)
    return max((depth[c.name] for c in netlist.output_cells()), default=0)


def check_golden(sim: FabricSim, golden) -> None:
    golden = np.asarray(golden, dtype=np.uint8)
    got = sim.golden_outputs
    if got.shape != golden.shape:
        raise GoldenIntegrityError(f"golden has shape {golden.shape}, design produces {got.shape}")
    bad = np.argwhere(got != golden)
    if bad.size:
        t, k = bad[0]
        raise GoldenIntegrityError(f"unfaulted design differs from the oracle at cycle {t}, output {k}")


@dataclass(frozen=True)
class ScrubResult:
    scrubbed_at: int
    recovered_within: int | None  # None: not recovered inside the budget

    @property
    def recovered(self) -> bool:
        return self.recovered_within is not None


def _scrub(sim: FabricSim, bit: int, at: int | None, budget: int) -> ScrubResult:
    run = sim.run(bit)
    first = run.first_difference
    if at is None:
        at = 0 if first is None else first + 1
    at = min(max(at, 0), sim.T - 1)
    state = sim.ff_state(run, at)
    # outputs before the scrub are already settled; the remaining window runs on golden bits
    win = sim.window(at, min(sim.T, at + budget))
    after = win.run_from_state(state) if state else None
    diff_rows = np.zeros(win.T, dtype=bool)
    if after is not None:
        for cyc in after.changed.values():
            diff_rows[cyc] = True
    if not diff_rows.any():
        return ScrubResult(at, 0)
    last = int(np.flatnonzero(diff_rows)[-1])
    if last == win.T - 1:
        return ScrubResult(at, None)
    return ScrubResult(at, last + 1)


def scrub_and_verify(impl, fault, stimuli, at: int | None = None, budget: int | None = None) -> ScrubResult:
    """Run with ``fault`` for ``at`` cycles, rewrite the golden bits keeping FF state, and
    count the cycles until the outputs match golden for the rest of the budget window.

    By default the scrub happens right after the first observed output mismatch and the
    budget is four pipeline depths.
    """
    i = _bit_index(impl, fault)
    _require_programmed(impl, i)
    if budget is None:
        budget = 4 * max(1, pipeline_depth(impl.netlist))
    return _scrub(fabric_sim(impl, stimuli), i, at, budget)


# per-process state for the worker pool (inherited through fork)
_ctx: dict = {}


def _run_chunk(chunk: list[int]) -> list[FaultRecord]:
    impl, sim, golden, scrub, budget = (_ctx[k] for k in ("impl", "sim", "golden", "scrub", "budget"))
    out = []
    for i in chunk:
        rec = describe_fault(impl, i)
        run = sim.run(i)
        cmp = compare(run.outputs, golden)
        rec.verdict, rec.first_mismatch = cmp.verdict, cmp.first_mismatch
        if scrub and cmp.verdict is Verdict.WRONG:
            rec.recovered_within = _scrub(sim, i, None, budget).recovered_within
        out.append(rec)
    return out


def run_campaign(impl, golden, stimuli, fault_list: FaultList, scrub: bool = False,
                 workers: int | None = None, label: str | None = None) -> CampaignReport:
    """Inject every fault of ``fault_list`` and aggregate a one-design report."""
    t0 = time.perf_counter()
    sim = fabric_sim(impl, stimuli)
    check_golden(sim, golden)
    golden = np.asarray(golden, dtype=np.uint8)
    _ctx.update(impl=impl, sim=sim, golden=golden, scrub=scrub,
                budget=4 * max(1, pipeline_depth(impl.netlist)))
    faults = list(fault_list.indices)
    workers = worker_count() if workers is None else max(1, workers)
    if workers == 1 or len(faults) < 2 * workers:
        records = _run_chunk(faults)
    else:
        size = -(-len(faults) // (4 * workers))
        chunks = [faults[k:k + size] for k in range(0, len(faults), size)]
        mp = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(workers, mp_context=mp) as pool:
            records = [r for part in pool.map(_run_chunk, chunks) for r in part]
    _ctx.clear()
    records.sort(key=lambda r: r.address)
    result = DesignResult.from_records(
        label or design_label(impl.name), records, resource_stats(impl).to_dict(),
        seed=fault_list.seed, fault_filter=fault_list.filter, candidates=len(fault_list.addresses),
        scrubbed=scrub,
    )
    log.info("%s: %d injected, %d wrong", result.design, result.injected, result.wrong)
    return CampaignReport(
        [result], arch_hash=impl.arch.hash, seed=fault_list.seed,
        runtime=time.perf_counter() - t0,
    )
