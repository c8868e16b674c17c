import numpy as np
import pytest

from tmrforge import campaign as camp
from tmrforge.netlist import CellKind, Domain, NetlistSim, build_fir, simulate_netlist, validate
from tmrforge.tmr import (P1, P2, P3, P3_NV, PartitionStrategy, apply_partition, domain_name, insert_voters,
                          strategy_cuts, tmr_stimuli, triplicate, vote_registers)


@pytest.fixture(scope="module")
def fir():
    return build_fir()


@pytest.fixture(scope="module")
def stim_bits():
    return camp.input_bits(camp.StimulusSpec(samples=200))


def test_triplicate_counts(fir):
    t = triplicate(fir)
    assert len(t) == 3 * len(fir)
    assert len(t.nets) == 3 * len(fir.nets)
    assert len(t.inputs) == 3 * len(fir.inputs)
    assert len(t.outputs) == 3 * len(fir.outputs)
    assert validate(t) == []
    assert {c.domain for c in t} == {Domain.D0, Domain.D1, Domain.D2}


def test_triplicated_block_copies(fir):
    t = triplicate(fir)
    nets = t.nets
    for kind, n in (("mult", 33), ("add", 30), ("reg", 30)):
        copies = {
            (b, i)
            for b in t.blocks_of_kind(kind)
            for i in range(3)
            if all(domain_name(o, i) in nets for o in t.blocks[b]["outputs"])
        }
        assert len(copies) == n


def test_domain_copies_agree(fir, stim_bits):
    t = triplicate(fir)
    out = simulate_netlist(t, tmr_stimuli(stim_bits))
    w = len(fir.outputs)
    assert np.array_equal(out[:, :w], out[:, w:2 * w])
    assert np.array_equal(out[:, :w], out[:, 2 * w:])


def test_empty_cut_is_identity(fir):
    t = triplicate(fir)
    v = insert_voters(t, set())
    assert sorted(v.cells) == sorted(t.cells)


def test_cut_net_corrupted_in_one_domain_is_voted_out(fir, stim_bits):
    cut = set(fir.blocks["add5"]["outputs"])
    nl = insert_voters(triplicate(fir), cut)
    sim = NetlistSim(nl)
    stim = tmr_stimuli(stim_bits)
    gold = sim.run(stim)
    victim = nl.nets[domain_name(sorted(cut)[0], 1)].driver
    assert np.array_equal(sim.run(stim, force={victim: "inv"}), gold)


def test_vote_registers_adds_three_voters_per_ff(fir):
    t = triplicate(fir)
    v = vote_registers(t)
    r = fir.count(CellKind.FF)
    assert v.count(CellKind.MAJ3) - t.count(CellKind.MAJ3) == 3 * r


def test_single_ff_upset_masked_double_upset_is_not(fir, stim_bits):
    nl = apply_partition(fir, P3_NV)
    stim = tmr_stimuli(stim_bits)
    sim = NetlistSim(nl)
    gold = sim.run(stim)
    q = "reg1.q8__d2"
    assert np.array_equal(sim.run(stim, flips=[(q, 30)]), gold)
    both = sim.run(stim, flips=[("reg1.q8__d0", 30), ("reg1.q8__d1", 30)])
    assert not np.array_equal(both, gold)
    # with register voting the same single flip is also masked
    nl2 = apply_partition(fir, P2)
    sim2 = NetlistSim(nl2)
    assert np.array_equal(sim2.run(stim, flips=[(q, 30)]), sim2.run(stim))


def test_p3_nv_has_only_output_voters(fir):
    nl = apply_partition(fir, P3_NV)
    voters = [c for c in nl if c.role == "voter"]
    assert len(voters) == 3 * len(fir.outputs)
    assert all(c.block.startswith("vote:") for c in voters)
    ff_nets = {c.output for c in nl if c.kind is CellKind.FF}
    assert not any(set(c.inputs) & ff_nets for c in voters)


def test_p1_votes_every_mult_and_adder(fir):
    nl = apply_partition(fir, P1)
    voted = {c.block.split(":", 1)[1] for c in nl if c.role == "voter"}
    for b in fir.blocks_of_kind("mult") + fir.blocks_of_kind("add") + fir.blocks_of_kind("reg"):
        assert set(fir.blocks[b]["outputs"]) <= voted


def test_cell_count_ordering(fir):
    counts = {s.name: apply_partition(fir, s).count() for s in (P1, P2, P3, P3_NV)}
    assert counts["p1"] > counts["p2"] > counts["p3"] > counts["p3_nv"] > fir.count()


@pytest.mark.parametrize("strategy", [P1, P2, P3, P3_NV])
def test_partition_preserves_function(fir, stim_bits, strategy):
    nl = apply_partition(fir, strategy)
    assert validate(nl) == []
    assert nl.outputs == fir.outputs
    assert np.array_equal(simulate_netlist(nl, tmr_stimuli(stim_bits)), simulate_netlist(fir, stim_bits))


def test_partition_is_deterministic(fir):
    from tmrforge.netlist import io as nio
    assert nio.to_dict(apply_partition(fir, P2)) == nio.to_dict(apply_partition(fir, P2))


def test_custom_strategy_and_errors(fir):
    cut = set(fir.blocks["mult3"]["outputs"])
    s = PartitionStrategy.parse("custom", cut)
    assert strategy_cuts(fir, s) == cut
    with pytest.raises(ValueError):
        PartitionStrategy.parse("p9")
    with pytest.raises(ValueError):
        strategy_cuts(fir, PartitionStrategy.custom({"no_such_net"}))
    with pytest.raises(ValueError):
        apply_partition(triplicate(fir), P2)
