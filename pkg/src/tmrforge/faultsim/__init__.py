"""Single-bit upsets on an implemented design: semantics, classes, verdicts."""

from .effects import (Comparison, EffectClass, FaultedImpl, FaultListError, FaultRecord, Verdict, apply_upset,
                      classify_effect, classify_index, compare, describe_fault, records_from_csv, records_to_csv)
from .logic import X, Z, kleene_table, lut_eval, resolve
from .sim import FabricSim, FaultRun, reference_trace

_sims: dict = {}


def fabric_sim(impl, stimuli) -> FabricSim:
    """Cached golden simulator for (implementation, stimuli)."""
    import numpy as np

    stim = np.ascontiguousarray(np.asarray(stimuli, dtype=np.uint8))
    key = (id(impl), stim.shape, hash(stim.tobytes()))
    sim = _sims.get(key)
    if sim is None or sim.impl is not impl:
        if len(_sims) > 8:
            _sims.clear()
        sim = _sims[key] = FabricSim(impl, stim)
    return sim


def simulate_fabric(design, stimuli, cycles=None):
    """Four-valued output trace (cycles x outputs) of an implementation or faulted view."""
    import numpy as np

    stim = np.asarray(stimuli, dtype=np.uint8)
    if cycles is not None:
        if cycles > stim.shape[0]:
            raise ValueError("not enough stimulus rows for the requested cycles")
        stim = stim[:cycles]
    if isinstance(design, FaultedImpl):
        return fabric_sim(design.base, stim).run(design.bit).outputs
    return fabric_sim(design, stim).golden_outputs.copy()


__all__ = [
    "Comparison", "EffectClass", "FaultedImpl", "FaultListError", "FaultRecord", "Verdict", "apply_upset",
    "classify_effect", "classify_index", "compare", "describe_fault", "records_from_csv", "records_to_csv",
    "X", "Z", "kleene_table", "lut_eval", "resolve", "FabricSim", "FaultRun", "reference_trace",
    "fabric_sim", "simulate_fabric",
]
