from .fir import DEFAULT_COEFFICIENTS, FirSpec, build_fir, fir_oracle, wrap
from .ir import MAJ3_TABLE, Cell, CellKind, Domain, Net, Netlist, bus
from .sim import NetlistSim, bits_to_words, simulate_netlist, words_to_bits
from .validate import Violation, validate

__all__ = [
    "DEFAULT_COEFFICIENTS", "FirSpec", "build_fir", "fir_oracle", "wrap",
    "MAJ3_TABLE", "Cell", "CellKind", "Domain", "Net", "Netlist", "bus",
    "NetlistSim", "bits_to_words", "simulate_netlist", "words_to_bits",
    "Violation", "validate",
]
