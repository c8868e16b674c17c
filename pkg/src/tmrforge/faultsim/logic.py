"""Four-valued logic: 0, 1, X (unknown) and Z (undriven).

Values are small unsigned codes so whole traces live in uint8 arrays.
Gates read Z as X. Wired resolution of two drivers: agreement keeps the
value, Z yields to the other driver, anything else is X.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

ZERO, ONE, X, Z = 0, 1, 2, 3
SYMBOLS = "01XZ"

RESOLVE = np.full((4, 4), X, dtype=np.uint8)
for _a in range(4):
    RESOLVE[_a, _a] = _a
    RESOLVE[_a, Z] = _a
    RESOLVE[Z, _a] = _a
RESOLVE_FLAT = RESOLVE.reshape(-1)


def resolve(a: int, b: int) -> int:
    return int(RESOLVE[a, b])


def resolve_many(values) -> int:
    out = Z
    for v in values:
        out = int(RESOLVE[out, v])
    return out


def resolve_arrays(arrays) -> np.ndarray:
    arrays = list(arrays)
    out = arrays[0]
    for a in arrays[1:]:
        out = RESOLVE_FLAT[out * 4 + a]
    return out


@lru_cache(maxsize=None)
def kleene_table(table: int, k: int) -> np.ndarray:
    """Output of a k-input LUT for every ternary input code sum(v_i * 3**i).

    An X input is expanded both ways; the output is determinate only when
    every expansion agrees.
    """
    out = np.empty(3 ** k, dtype=np.uint8)
    for code in range(3 ** k):
        digits = [(code // 3 ** i) % 3 for i in range(k)]
        free = [i for i, d in enumerate(digits) if d == X]
        seen = set()
        for fill in itertools.product((0, 1), repeat=len(free)):
            bits = list(digits)
            for i, v in zip(free, fill):
                bits[i] = v
            m = sum(b << i for i, b in enumerate(bits))
            seen.add((table >> m) & 1)
        out[code] = seen.pop() if len(seen) == 1 else X
    out.setflags(write=False)
    return out


def lut_eval(table: int, inputs) -> int:
    """Scalar Kleene evaluation (Z reads as X)."""
    code = 0
    for i, v in enumerate(inputs):
        code += min(int(v), X) * 3 ** i
    return int(kleene_table(table, len(inputs))[code])


def lut_eval_arrays(kt: np.ndarray, arrays) -> np.ndarray:
    code = None
    w = 1
    for a in arrays:
        term = np.minimum(a, X) if w == 1 else np.minimum(a, X) * np.uint8(w)
        code = term if code is None else code + term
        w *= 3
    return kt[code]


def to_text(values) -> str:
    return "".join(SYMBOLS[int(v)] for v in values)
