"""Fault lists: the programmed bits of an implementation, filtered and sampled."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from ..fabric.arch import BitAddress, BitKind
from ..fabric.resources import programmed_indices
from ..faultsim.effects import EffectClass, FaultListError, classify_index

RESOURCE_FILTERS = {
    "all": None,
    "routing": (BitKind.PIP_MUX, BitKind.PIP_XPOINT),
    "lut": (BitKind.LUT,),
    "ff": (BitKind.FF_INIT,),
    "clb_mux": (BitKind.CLB_MUX,),
}


def impl_id(impl) -> str:
    h = hashlib.sha256(np.packbits(impl.config).tobytes()).hexdigest()[:12]
    return f"{impl.name}@{impl.arch.hash}:{h}"


def _effect_filter(name: str) -> EffectClass | None:
    for e in EffectClass:
        if e.value.lower() == name.lower():
            return e
    return None


def filter_indices(impl, flt: str = "all") -> np.ndarray:
    """Programmed bit indices selected by a resource kind or an effect class name."""
    idx = programmed_indices(impl)
    key = flt.lower()
    if key in RESOURCE_FILTERS:
        kinds = RESOURCE_FILTERS[key]
        if kinds is None:
            return idx
        return idx[np.isin(impl.arch.bit_kind[idx], np.array(kinds, dtype=impl.arch.bit_kind.dtype))]
    eff = _effect_filter(flt)
    if eff is None:
        raise ValueError(f"unknown fault filter {flt!r}")
    return np.array([i for i in idx if classify_index(impl, int(i)) is eff], dtype=np.int64)


@dataclass(frozen=True)
class FaultList:
    impl_id: str
    addresses: tuple[BitAddress, ...]  # every candidate, in address order
    seed: int
    sample_size: int
    filter: str
    sample: tuple[BitAddress, ...]  # drawn without replacement, in address order
    indices: tuple[int, ...]  # flat bit indices of ``sample``

    def __len__(self) -> int:
        return len(self.sample)


def build_fault_list(impl, flt: str = "all", seed: int = 0, sample_size: int | None = None) -> FaultList:
    idx = filter_indices(impl, flt)
    n = int(idx.size)
    k = n if sample_size is None else int(sample_size)
    if k > n:
        raise FaultListError(f"sample of {k} requested from a list of {n}")
    if k < 0:
        raise FaultListError("sample size must be non-negative")
    if k == n:
        pick = idx
    else:
        rng = np.random.default_rng(seed)
        pick = np.sort(rng.choice(idx, size=k, replace=False))
    address = impl.arch.address
    return FaultList(
        impl_id(impl), tuple(address(int(i)) for i in idx), seed, k, flt,
        tuple(address(int(i)) for i in pick), tuple(int(i) for i in pick),
    )
