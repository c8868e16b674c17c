"""FIR case-study generator and its word-level reference model.

The filter is direct form: a delay line of ``taps - 1`` registers holds
x[n-1] .. x[n-taps+1], one constant multiplier per tap forms c[k]*x[n-k],
and a chain of ripple-carry adders accumulates the products. The
accumulator is shifted right arithmetically by ``scale_shift`` and the low
``output_width`` bits are driven out.

Multipliers are constant-coefficient partial-product arrays: the AND gates
of a generic array collapse to wiring once the coefficient bits are fixed,
leaving one shifted row per signed digit of the coefficient, summed with
full-adder LUT pairs (sum = XOR3, carry = MAJ). Buses are sign-extension
aware: bits above a value's natural width reuse the sign net instead of
duplicating full adders.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

from .ir import Cell, CellKind, Netlist, bus

DEFAULT_COEFFICIENTS = (1, -1, -9, 6, 73, 120, 73, 6, -9, -1, 1)


@dataclass(frozen=True)
class FirSpec:
    coefficients: tuple[int, ...] = DEFAULT_COEFFICIENTS
    input_width: int = 9
    acc_width: int = 18
    output_width: int = 9
    scale_shift: int = 9

    @property
    def taps(self) -> int:
        return len(self.coefficients)

    def check(self) -> None:
        for name in ("input_width", "acc_width", "output_width"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.scale_shift < 0:
            raise ValueError("scale_shift must be non-negative")
        if not self.coefficients:
            raise ValueError("at least one coefficient required")
        lo, hi = -(1 << (self.input_width - 1)), (1 << (self.input_width - 1)) - 1
        for c in self.coefficients:
            if not lo <= c <= hi:
                raise ValueError(f"coefficient {c} does not fit in {self.input_width} signed bits")
        if self.acc_width < 2 * self.input_width:
            raise ValueError("acc_width must hold a full product")


def wrap(value: int, width: int) -> int:
    """Two's-complement wrap of ``value`` into ``width`` bits."""
    value &= (1 << width) - 1
    return value - (1 << width) if value >> (width - 1) else value


def fir_oracle(spec: FirSpec, samples: Sequence[int]) -> list[int]:
    """y[n] = wrap_out(wrap_acc(sum_k c[k] * x[n-k]) >> shift), zero history."""
    c = spec.coefficients
    lo, hi = -(1 << (spec.input_width - 1)), (1 << (spec.input_width - 1)) - 1
    xs = [int(s) for s in samples]
    for s in xs:
        if not lo <= s <= hi:
            raise ValueError(f"sample {s} outside {spec.input_width}-bit signed range")
    out = []
    for n in range(len(xs)):
        acc = 0
        for k in range(min(len(c), n + 1)):
            acc += c[k] * xs[n - k]
        acc = wrap(acc, spec.acc_width)
        out.append(wrap(acc >> spec.scale_shift, spec.output_width))
    return out


# A literal is a constant bit (0/1) or (net, inverted).
Lit = Union[int, tuple[str, bool]]


def _neg(a: Lit) -> Lit:
    if isinstance(a, int):
        return a ^ 1
    return (a[0], not a[1])


def _xor3(a, b, c):
    return a ^ b ^ c


def _maj(a, b, c):
    return (a & b) | (a & c) | (b & c)


class _Builder:
    def __init__(self, netlist: Netlist):
        self.nl = netlist
        self.block: str | None = None
        self._n = 0
        self._inverters: dict[str, str] = {}
        self._ties: dict[int, str] = {}

    def _name(self, stem: str) -> str:
        self._n += 1
        return f"{self.block or 'top'}.{stem}{self._n}"

    def lut(self, fn: Callable[..., int], lits: Sequence[Lit], stem: str = "l") -> Lit:
        nets: list[str] = []
        for a in lits:
            if not isinstance(a, int) and a[0] not in nets:
                nets.append(a[0])

        def value(assign: dict[str, int]) -> int:
            bits = [a if isinstance(a, int) else assign[a[0]] ^ int(a[1]) for a in lits]
            return fn(*bits) & 1

        k = len(nets)
        table = 0
        for m in range(1 << k):
            if value({n: (m >> i) & 1 for i, n in enumerate(nets)}):
                table |= 1 << m
        # drop inputs the function ignores
        i = 0
        while i < len(nets):
            k = len(nets)
            lo = hi = 0
            for m in range(1 << (k - 1)):
                low = m & ((1 << i) - 1)
                base = ((m >> i) << (i + 1)) | low
                lo |= ((table >> base) & 1) << m
                hi |= ((table >> (base | (1 << i))) & 1) << m
            if lo == hi:
                nets.pop(i)
                table = lo
            else:
                i += 1
        k = len(nets)
        if k == 0:
            return table & 1
        if k == 1 and table in (0b10, 0b01):
            return (nets[0], table == 0b01)
        cell = Cell(self._name(stem), CellKind.LUT, nets, None, table, block=self.block)
        cell.output = cell.name
        self.nl.add(cell)
        return (cell.name, False)

    def net(self, a: Lit) -> str:
        """Materialise a literal as a real net."""
        if isinstance(a, int):
            if a not in self._ties:
                name = f"tie{a}"
                self.nl.add(Cell(name, CellKind.LUT, [], name, table=a, role="const"))
                self._ties[a] = name
            return self._ties[a]
        net, inv = a
        if not inv:
            return net
        if net not in self._inverters:
            cell = Cell(self._name("inv"), CellKind.LUT, [net], None, 0b01, block=self.block)
            cell.output = cell.name
            self.nl.add(cell)
            self._inverters[net] = cell.name
        return self._inverters[net]

    @staticmethod
    def natural_width(bits: Sequence[Lit]) -> int:
        m = len(bits)
        while m > 1 and bits[m - 2] == bits[m - 1]:
            m -= 1
        return m

    def add(self, a: Sequence[Lit], b: Sequence[Lit], subtract: bool = False) -> list[Lit]:
        width = len(a)
        if subtract:
            b = [_neg(x) for x in b]
        m = min(max(self.natural_width(a), self.natural_width(b)) + 1, width)
        carry: Lit = 1 if subtract else 0
        out: list[Lit] = []
        for i in range(m):
            out.append(self.lut(_xor3, (a[i], b[i], carry), "s"))
            if i + 1 < m:
                carry = self.lut(_maj, (a[i], b[i], carry), "c")
        return out + [out[-1]] * (width - m)


def csd_digits(c: int) -> list[tuple[int, int]]:
    """Non-adjacent-form digits of ``c`` as (sign, shift) pairs."""
    out = []
    j = 0
    while c:
        if c & 1:
            d = 2 - (c % 4)
            out.append((d, j))
            c -= d
        c //= 2
        j += 1
    return out


def build_fir(spec: FirSpec = FirSpec(), name: str = "fir") -> Netlist:
    spec.check()
    W, n = spec.acc_width, spec.input_width
    nl = Netlist(name, inputs=bus("x", n), outputs=bus("y", spec.output_width))
    b = _Builder(nl)

    xin = []
    for p in nl.inputs:
        nl.add(Cell(p, CellKind.IBUF, [], p, port=p))
        xin.append(p)

    # delay line: reg k holds x[n-k]
    taps_x = [xin]
    for k in range(1, spec.taps):
        blk = f"reg{k}"
        b.block = blk
        q = []
        for i, d in enumerate(taps_x[-1]):
            name = f"{blk}.q{i}"
            nl.add(Cell(name, CellKind.FF, [d], name, init=0, block=blk))
            q.append(name)
        nl.blocks[blk] = {"kind": "reg", "index": k, "outputs": list(q)}
        taps_x.append(q)

    acc: list[Lit] | None = None
    for k, c in enumerate(spec.coefficients):
        blk = f"mult{k}"
        b.block = blk
        x = [(s, False) for s in taps_x[k]]
        x = x + [x[-1]] * (W - n)
        prod: list[Lit] | None = None
        digits = sorted(csd_digits(c), key=lambda d: (d[0] < 0, d[1]))
        for sign, shift in digits:
            row = [0] * shift + x[: W - shift]
            if prod is None:
                prod = row if sign > 0 else b.add([0] * W, row, subtract=True)
            else:
                prod = b.add(prod, row, subtract=sign < 0)
        if prod is None:
            prod = [0] * W
        prod = [p if isinstance(p, int) else (b.net(p), False) for p in prod]
        nl.blocks[blk] = {"kind": "mult", "index": k, "outputs": _distinct_nets(prod)}

        if acc is None:
            acc = prod
            continue
        blk = f"add{k}"
        b.block = blk
        acc = b.add(acc, prod)
        acc = [p if isinstance(p, int) else (b.net(p), False) for p in acc]
        nl.blocks[blk] = {"kind": "add", "index": k, "outputs": _distinct_nets(acc)}

    b.block = "out"
    for i, port in enumerate(nl.outputs):
        j = min(spec.scale_shift + i, W - 1)
        net = b.net(acc[j])
        nl.add(Cell(f"obuf.{port}", CellKind.OBUF, [net], None, port=port, block="out"))
    nl.blocks["out"] = {"kind": "out", "index": 0, "outputs": []}
    sweep(nl)
    return nl


def sweep(nl: Netlist) -> int:
    """Remove logic cells whose outputs nobody reads (unused input pads stay)."""
    removed = 0
    while True:
        nets = nl.nets
        dead = [
            c.name for c in nl
            if c.kind in (CellKind.LUT, CellKind.FF, CellKind.MAJ3) and not nets[c.output].sinks
        ]
        if not dead:
            break
        for name in dead:
            nl.remove(name)
        removed += len(dead)
    gone = set(nl.nets)
    for meta in nl.blocks.values():
        meta["outputs"] = [n for n in meta["outputs"] if n in gone]
    return removed


def _distinct_nets(bits: Sequence[Lit]) -> list[str]:
    seen: list[str] = []
    for p in bits:
        if not isinstance(p, int) and p[0] not in seen:
            seen.append(p[0])
    return seen
