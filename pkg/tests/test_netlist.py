import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from tmrforge.netlist import (Cell, CellKind, FirSpec, Netlist, bits_to_words, build_fir, fir_oracle,
                              simulate_netlist, validate, words_to_bits, wrap)
from tmrforge.netlist import io as nio


def _conv(spec, xs):
    # straight convolution written out independently of fir_oracle
    out = []
    for n in range(len(xs)):
        acc = 0
        for k, c in enumerate(spec.coefficients):
            if n - k >= 0:
                acc += c * xs[n - k]
        acc = wrap(acc, spec.acc_width)
        out.append(wrap(acc >> spec.scale_shift, spec.output_width))
    return out


def test_oracle_impulse_255_center_tap():
    spec = FirSpec()
    y = fir_oracle(spec, [255] + [0] * 12)
    assert y[5] == (255 * 120) >> 9 == 59


def test_oracle_unit_impulse_floors_each_tap():
    spec = FirSpec()
    y = fir_oracle(spec, [1] + [0] * 15)
    # arithmetic shift floors: positive taps give 0, negative taps give -1
    assert y[:11] == [c >> 9 for c in spec.coefficients]
    assert y[11:] == [0] * 5


def test_oracle_zero_input():
    assert fir_oracle(FirSpec(), [0] * 40) == [0] * 40


def test_oracle_three_taps_by_hand():
    spec = FirSpec(coefficients=(100, -50, 7))
    xs = [200, -100, 30, 0]
    # n=1: 100*-100 + -50*200 = -20000 -> >>9 = -40 (floor)
    assert fir_oracle(spec, xs)[:2] == [(100 * 200) >> 9, -40]


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-256, 255), min_size=1, max_size=60))
def test_oracle_matches_plain_convolution(xs):
    spec = FirSpec()
    assert fir_oracle(spec, xs) == _conv(spec, xs)


def test_fir_block_counts():
    nl = build_fir()
    kinds = [m["kind"] for m in nl.blocks.values()]
    assert kinds.count("mult") == 11
    assert kinds.count("add") == 10
    assert kinds.count("reg") == 10
    assert nl.count(CellKind.FF) == 90
    assert {c.kind for c in nl} <= {CellKind.LUT, CellKind.FF, CellKind.IBUF, CellKind.OBUF}
    assert validate(nl) == []


def test_fir_netlist_matches_oracle_on_impulse_and_random():
    spec = FirSpec()
    rng = np.random.default_rng(5)
    xs = [255] + [0] * 10 + [int(v) for v in rng.integers(-256, 256, 1024)]
    out = simulate_netlist(build_fir(spec), words_to_bits(xs, 9))
    assert bits_to_words(out) == fir_oracle(spec, xs)


def test_zero_filter_outputs_zero():
    spec = FirSpec(coefficients=(0,) * 11)
    rng = np.random.default_rng(2)
    xs = [int(v) for v in rng.integers(-256, 256, 50)]
    out = simulate_netlist(build_fir(spec), words_to_bits(xs, 9))
    assert not out.any()


@settings(max_examples=10, deadline=None)
@given(st.lists(st.integers(-256, 255), min_size=3, max_size=5), st.integers(0, 2**32 - 1))
def test_small_filters_match_oracle(coeffs, seed):
    spec = FirSpec(coefficients=tuple(coeffs))
    xs = [int(v) for v in np.random.default_rng(seed).integers(-256, 256, 40)]
    out = simulate_netlist(build_fir(spec), words_to_bits(xs, 9))
    assert bits_to_words(out) == fir_oracle(spec, xs)


def _single(kind, table=0, n_in=2):
    ins = [f"a{i}" for i in range(n_in)]
    cells = [Cell(p, CellKind.IBUF, [], p, port=p) for p in ins]
    cells.append(Cell("g", kind, list(ins), "g", table=table))
    cells.append(Cell("ob", CellKind.OBUF, ["g"], None, port="y"))
    return Netlist("t", cells, inputs=ins, outputs=["y"])


def test_maj3_cell():
    out = simulate_netlist(_single(CellKind.MAJ3, n_in=3), np.array([[0, 0, 1], [1, 0, 1]]))
    assert out[:, 0].tolist() == [0, 1]


def test_lut2_xor():
    out = simulate_netlist(_single(CellKind.LUT, table=0b0110), np.array([[1, 1], [1, 0]]))
    assert out[:, 0].tolist() == [0, 1]


def test_validate_multiple_drivers():
    nl = _single(CellKind.LUT, table=0b0110)
    nl.add(Cell("g2", CellKind.LUT, ["a0"], "g", table=0b10))
    rules = [(v.rule, v.subject) for v in validate(nl)]
    assert ("MultipleDrivers", "g") in rules


def test_validate_combinational_cycle():
    cells = [
        Cell("a", CellKind.IBUF, [], "a", port="a"),
        Cell("l1", CellKind.LUT, ["a", "l2"], "l1", table=0b0110),
        Cell("l2", CellKind.LUT, ["l1"], "l2", table=0b10),
        Cell("ob", CellKind.OBUF, ["l2"], None, port="y"),
    ]
    rules = [v.rule for v in validate(Netlist("loop", cells, inputs=["a"], outputs=["y"]))]
    assert "CombinationalCycle" in rules


def test_ff_loop_is_legal_and_toggles():
    cells = [
        Cell("a", CellKind.IBUF, [], "a", port="a"),
        Cell("q", CellKind.FF, ["d"], "q"),
        Cell("d", CellKind.LUT, ["q", "a"], "d", table=0b0110),
        Cell("ob", CellKind.OBUF, ["q"], None, port="y"),
    ]
    nl = Netlist("tff", cells, inputs=["a"], outputs=["y"])
    assert validate(nl) == []
    out = simulate_netlist(nl, np.ones((5, 1), dtype=np.uint8))
    assert out[:, 0].tolist() == [0, 1, 0, 1, 0]


def test_netlist_json_round_trip(tmp_path):
    nl = build_fir()
    nio.save(nl, tmp_path / "fir.json")
    back = nio.load(tmp_path / "fir.json")
    assert nio.to_dict(back) == nio.to_dict(nl)


@given(st.integers(-256, 255))
def test_word_bit_round_trip(v):
    assert bits_to_words(words_to_bits([v], 9)) == [v]
