from collections import deque

import pytest

from tmrforge.fabric import make_arch
from tmrforge.netlist import Cell, CellKind, Netlist
from tmrforge.netlist.ir import MAJ3_TABLE
from tmrforge.pnr import (Placement, Unroutable, audit_floorplan, audit_implementation, cross_domain_pairs,
                          place, route)
from tmrforge.pnr.implement import expand_table
from tmrforge.pnr.place import floorplan_regions


def _chain(n_luts=2):
    cells = [Cell("a", CellKind.IBUF, [], "a", port="a")]
    prev = "a"
    for i in range(n_luts):
        cells.append(Cell(f"g{i}", CellKind.LUT, [prev], f"g{i}", table=0b01))
        prev = f"g{i}"
    cells.append(Cell("ob", CellKind.OBUF, [prev], None, port="y"))
    return Netlist("chain", cells, inputs=["a"], outputs=["y"])


def test_single_cell_takes_the_only_slot():
    arch = make_arch(rows=1, cols=1, channel_width=2, les_per_tile=1)
    pl = place(_chain(1), arch)
    assert pl.les == {"g0": 0}


def test_placement_and_routing_are_deterministic():
    arch = make_arch(rows=3, cols=3, channel_width=2)
    nl = _chain(4)
    p1, p2 = place(nl, arch), place(nl, arch)
    assert p1 == p2
    assert route(nl, arch, p1).to_dict() == route(nl, arch, p2).to_dict()


def _min_wires(arch, src, pins):
    """Breadth-first search over the mux graph: fewest channel wires from src to any pin."""
    w0 = arch.WIRE0
    readers: dict[int, list[int]] = {}
    for mux, ins in arch.mux_inputs.items():
        for s, _ in ins:
            readers.setdefault(s, []).append(mux)
    dist = {src: 0}
    q = deque([src])
    while q:
        node = q.popleft()
        for mux in readers.get(node, ()):
            if mux in pins:
                return dist[node]
            if arch.WD0 <= mux < w0:
                nxt = mux - arch.WD0 + w0
                if nxt not in dist:
                    dist[nxt] = dist[node] + 1
                    q.append(nxt)
    return None


def test_adjacent_tiles_route_is_shortest():
    arch = make_arch(rows=3, cols=3, channel_width=2)
    nl = _chain(2)
    t0, t1 = arch.tile_at(1, 0), arch.tile_at(1, 1)
    pl = place(nl, arch)
    pl = Placement({"g0": t0 * arch.L, "g1": t1 * arch.L}, dict(pl.pads))
    rt = route(nl, arch, pl)
    pins = {arch.pin_node(t1 * arch.L, p) for p in range(4)}
    assert len(rt.nets["g0"].wires) == _min_wires(arch, arch.out_node(t0 * arch.L), pins) == 1


def test_zero_channel_width_is_unroutable():
    arch = make_arch(rows=1, cols=2, channel_width=0, les_per_tile=1)
    nl = _chain(2)
    pl = Placement({"g0": 0, "g1": 1}, {"a": int(arch.tile_pads[0][0]), "ob": int(arch.tile_pads[1][0])})
    with pytest.raises(Unroutable):
        route(nl, arch, pl)


def test_expand_table_permutes_pins():
    # XOR of inputs 0 and 1 wired to pins 2 and 0
    t = expand_table(0b0110, 2, pins=[2, 0])
    for m in range(16):
        assert (t >> m) & 1 == ((m >> 2) & 1) ^ (m & 1)


def test_floorplan_regions_are_disjoint(arch):
    regions = floorplan_regions(arch)
    cols = {d: {c for lo, hi in r for c in range(lo, hi)} for d, r in regions.items()}
    doms = sorted(cols)
    for i, a in enumerate(doms):
        for b in doms[i + 1:]:
            assert not cols[a] & cols[b]
    assert set().union(*cols.values()) == set(range(arch.cols))


def test_p2_voters_take_one_lut_each(impl):
    im = impl("p2")
    arch = im.arch
    voters = [c for c in im.netlist if c.kind is CellKind.MAJ3]
    les = [im.placement.les[c.name] for c in voters]
    assert len(set(les)) == len(voters)
    for c, le in zip(voters, les):
        bits = im.config[arch.lut_bit0[le]:arch.lut_bit0[le] + 16]
        t = sum(int(b) << m for m, b in enumerate(bits))
        pins = [next(p for p in range(4) if im.owner.get(arch.pin_node(le, p)) == n) for n in c.inputs]
        assert t == expand_table(MAJ3_TABLE, 3, pins)


def test_p3_floorplan_separates_domains(impl, arch):
    im = impl("p3", True)
    assert audit_floorplan(im.netlist, arch, im.placement) == []
    cols = {"D0": set(), "D12": set()}
    for name, le in im.placement.les.items():
        d = im.netlist.cells[name].domain.value
        c = arch.tile_rc(le // arch.L)[1]
        cols["D0" if d == "D0" else "D12"].add(c)
    assert not cols["D0"] & cols["D12"]


@pytest.mark.parametrize("variant", ["p2", "p3"])
def test_floorplan_reduces_cross_domain_adjacency(impl, variant):
    assert cross_domain_pairs(impl(variant, True)) <= cross_domain_pairs(impl(variant, False))


def test_implementation_save_load(impl, tmp_path):
    from tmrforge.pnr import Implementation
    im = impl("std")
    im.save(tmp_path / "std.bit")
    back = Implementation.load(tmp_path / "std.bit")
    assert (back.config == im.config).all()
    assert back.routing.to_dict() == im.routing.to_dict()
    assert audit_implementation(back) == []


def test_p1_routing_share_below_p3(impl):
    from tmrforge.fabric.resources import resource_stats
    assert resource_stats(impl("p1")).routing_share < resource_stats(impl("p3")).routing_share


def test_logic_cell_counts_follow_partitioning(impl):
    n = {v: len(impl(v).placement.les) for v in ("std", "p1", "p2", "p3", "p3_nv")}
    assert n["p1"] > n["p2"] > n["p3"] > n["p3_nv"] > n["std"]
