"""Upset views, structural effect classes, verdicts and fault records."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..fabric.arch import BitAddress, BitKind
from ..fabric.resources import programmed_indices, touched_nets


class EffectClass(str, enum.Enum):
    LUT = "LUT"
    MUX = "MUX"
    INITIALIZATION = "Initialization"
    OPEN = "Open"
    BRIDGE = "Bridge"
    INPUT_ANTENNA = "InputAntenna"
    CONFLICT = "Conflict"
    OTHERS = "Others"


class Verdict(str, enum.Enum):
    SILENT = "SilentMasked"
    WRONG = "WrongAnswer"


class FaultListError(ValueError):
    pass


def _bit_index(impl, bit) -> int:
    if isinstance(bit, BitAddress):
        return impl.arch.bit_index(bit)
    return int(bit)


def _require_programmed(impl, i: int) -> None:
    prog = programmed_indices(impl)
    j = np.searchsorted(prog, i)
    if j >= prog.size or prog[j] != i:
        raise FaultListError(f"bit {impl.arch.address(i)} is not in the fault list")


@dataclass
class FaultedImpl:
    """An implementation with one configuration bit inverted.

    Shares everything with ``base`` except its own configuration copy.
    """

    base: object
    bit: int

    @cached_property
    def config(self) -> np.ndarray:
        cfg = self.base.config.copy()
        cfg[self.bit] ^= 1
        cfg.setflags(write=False)
        return cfg

    @property
    def address(self) -> BitAddress:
        return self.base.arch.address(self.bit)

    def __getattr__(self, name):
        if name in ("base", "bit"):
            raise AttributeError(name)
        return getattr(self.base, name)


def apply_upset(impl, bit) -> FaultedImpl:
    i = _bit_index(impl, bit)
    _require_programmed(impl, i)
    return FaultedImpl(impl, i)


def classify_effect(impl, bit) -> EffectClass:
    i = _bit_index(impl, bit)
    _require_programmed(impl, i)
    return classify_index(impl, i)


def classify_index(impl, i: int) -> EffectClass:
    arch, owner = impl.arch, impl.owner
    kind = arch.bit_kind[i]
    if kind == BitKind.LUT:
        return EffectClass.LUT
    if kind == BitKind.FF_INIT:
        return EffectClass.INITIALIZATION
    if kind == BitKind.CLB_MUX:
        return EffectClass.MUX
    if kind == BitKind.PIP_MUX:
        a = owner.get(arch.wire_node(int(arch.bit_a[i])))
        b = owner.get(int(arch.bit_b[i]))
        if impl.config[i]:
            return EffectClass.OPEN
        if a is not None and b is not None:
            return EffectClass.CONFLICT if a != b else EffectClass.OTHERS
    elif kind == BitKind.PIP_XPOINT:
        a = owner.get(arch.wire_node(int(arch.bit_a[i])))
        b = owner.get(arch.wire_node(int(arch.bit_b[i])))
        if impl.config[i]:
            return EffectClass.OPEN
        if a is not None and b is not None:
            return EffectClass.BRIDGE if a != b else EffectClass.OTHERS
    else:
        return EffectClass.OTHERS
    if (a is None) != (b is None):
        return EffectClass.INPUT_ANTENNA
    return EffectClass.OTHERS


@dataclass(frozen=True)
class Comparison:
    verdict: Verdict
    first_mismatch: int | None = None


def compare(dut_trace, golden_trace) -> Comparison:
    """WrongAnswer at the first cycle where a determinate golden bit is not matched."""
    dut = np.asarray(dut_trace)
    gold = np.asarray(golden_trace)
    if dut.shape != gold.shape:
        raise ValueError(f"trace shapes differ: {dut.shape} vs {gold.shape}")
    if dut.ndim == 1:
        dut, gold = dut[:, None], gold[:, None]
    bad = (gold <= 1) & (dut != gold)
    rows = np.flatnonzero(bad.any(axis=1))
    if rows.size:
        return Comparison(Verdict.WRONG, int(rows[0]))
    return Comparison(Verdict.SILENT)


@dataclass
class FaultRecord:
    address: BitAddress
    effect: EffectClass
    nets: tuple[str, ...] = ()
    domains: tuple[str, ...] = ()
    verdict: Verdict | None = None
    first_mismatch: int | None = None
    recovered_within: int | None = field(default=None, compare=False)

    CSV_FIELDS = ("address", "class", "domains", "verdict", "first_mismatch_cycle")

    def row(self) -> list[str]:
        return [
            str(self.address),
            self.effect.value,
            "+".join(self.domains),
            self.verdict.value if self.verdict else "",
            "" if self.first_mismatch is None else str(self.first_mismatch),
        ]

    @classmethod
    def from_row(cls, row) -> "FaultRecord":
        addr, eff, doms, verdict, first = row[:5]
        return cls(
            BitAddress.parse(addr), EffectClass(eff),
            domains=tuple(d for d in doms.split("+") if d),
            verdict=Verdict(verdict) if verdict else None,
            first_mismatch=int(first) if first else None,
        )


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FaultRecord.CSV_FIELDS)
    for r in records:
        w.writerow(r.row())
    return buf.getvalue()


def records_from_csv(text: str) -> list[FaultRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    return [FaultRecord.from_row(r) for r in rows[1:] if r]


def describe_fault(impl, i: int) -> FaultRecord:
    """Structural part of a record: address, class, touched nets and domains."""
    nets = touched_nets(impl, i)
    return FaultRecord(
        impl.arch.address(i), classify_index(impl, i), nets, tuple(sorted(impl.domains_of(nets))),
    )
