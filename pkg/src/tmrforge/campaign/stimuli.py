"""Input stimuli and the oracle golden trace for the FIR case study."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..netlist.fir import FirSpec, fir_oracle
from ..netlist.sim import words_to_bits


@dataclass(frozen=True)
class StimulusSpec:
    seed: int = 1
    samples: int = 1024
    impulse: int = 255
    settle: int = 10  # zero samples after the impulse, enough to clear the tap line

    def words(self, fir: FirSpec = FirSpec()) -> list[int]:
        lo = -(1 << (fir.input_width - 1))
        hi = 1 << (fir.input_width - 1)
        if not lo <= self.impulse < hi:
            raise ValueError(f"impulse {self.impulse} does not fit {fir.input_width} signed bits")
        rng = np.random.default_rng(self.seed)
        rand = rng.integers(lo, hi, size=self.samples)
        return [self.impulse] + [0] * self.settle + [int(v) for v in rand]

    @property
    def cycles(self) -> int:
        return 1 + self.settle + self.samples

    def to_dict(self) -> dict:
        return asdict(self)


def input_bits(spec: StimulusSpec, fir: FirSpec = FirSpec()) -> np.ndarray:
    """(cycles, input_width) bit matrix of the untriplicated input bus."""
    return words_to_bits(spec.words(fir), fir.input_width)


def golden_trace(spec: StimulusSpec, fir: FirSpec = FirSpec()) -> np.ndarray:
    """Expected output bits straight from the word-level oracle."""
    return words_to_bits(fir_oracle(fir, spec.words(fir)), fir.output_width)


def design_stimuli(impl, bits: np.ndarray) -> np.ndarray:
    """Widen the input bits to however many input pads the design has (1x or 3x)."""
    bits = np.asarray(bits, dtype=np.uint8)
    n = len(impl.input_pads)
    if n == bits.shape[1]:
        return bits
    if n % bits.shape[1]:
        raise ValueError(f"design has {n} inputs, stimuli have {bits.shape[1]}")
    return np.tile(bits, (1, n // bits.shape[1]))
