"""End-to-end acceptance checks, one test per criterion."""

import hashlib
import time

import numpy as np

from tmrforge import campaign as camp
from tmrforge.campaign.report import DesignResult
from tmrforge.fabric import decode_bitstream, encode_bitstream
from tmrforge.fabric.bitstream import from_bytes, to_bytes
from tmrforge.fabric.resources import resource_stats
from tmrforge.faultsim import Verdict, fabric_sim
from tmrforge.netlist import Domain, FirSpec, NetlistSim, fir_oracle, words_to_bits
from tmrforge.pnr import audit_implementation
from tmrforge.tmr import tmr_stimuli

VOTED = ("p1", "p2", "p3")
LABEL = {"std": "Standard", "p1": "TMR_p1", "p2": "TMR_p2", "p3": "TMR_p3", "p3_nv": "TMR_p3_nv"}


def test_ac01_oracle_equivalence(impl, stim, bits, verdict):
    expected = words_to_bits(fir_oracle(FirSpec(), stim.words()), 9)
    bad, t0 = [], time.perf_counter()
    for v in camp.VARIANTS:
        im = impl(v)
        out = fabric_sim(im, camp.design_stimuli(im, bits)).golden_outputs
        if not np.array_equal(out, expected):
            bad.append(v)
    dt = time.perf_counter() - t0
    ok = not bad and dt < 60
    verdict("AC1 oracle equivalence", ok,
            f"5 variants x {stim.cycles} cycles, mismatching={bad or 'none'}, simulation {dt:.1f}s (<60s)")
    assert ok


def test_ac02_lut_upset_immunity(impl, verdict):
    rep = camp.campaign({v: impl(v) for v in VOTED}, flt="lut", sample=None)
    counts = {d.design: (d.wrong, d.injected) for d in rep.designs}
    ok = all(w == 0 for w, _ in counts.values())
    verdict("AC2 LUT immunity", ok, ", ".join(f"{k} {w}/{n} wrong" for k, (w, n) in counts.items()))
    assert ok


def test_ac03_domain_confinement(routing_campaign, verdict):
    singles = {Domain.D0.value, Domain.D1.value, Domain.D2.value}
    viol, checked = [], 0
    for v in VOTED + ("p3_nv",):
        for r in routing_campaign.get(LABEL[v]).records:
            if len(r.domains) <= 1 and set(r.domains) <= singles:
                checked += 1
                if r.verdict is not Verdict.SILENT:
                    viol.append((v, str(r.address)))
    ok = not viol
    verdict("AC3 domain confinement", ok, f"{checked} single-domain faults, {len(viol)} not SilentMasked {viol[:3]}")
    assert ok


def test_ac04_protection_ordering(routing_campaign, verdict):
    rate = {v: routing_campaign.get(LABEL[v]).wrong / routing_campaign.get(LABEL[v]).injected for v in LABEL}
    checks = {
        "std>=10*p2": rate["std"] >= 10 * rate["p2"],
        "p3_nv>p3": rate["p3_nv"] > rate["p3"],
        "voted<std": all(rate[v] < rate["std"] for v in ("p1", "p2", "p3", "p3_nv")),
    }
    order = " < ".join(sorted(VOTED, key=rate.get))
    ok = all(checks.values())
    pct = ", ".join(f"{v} {100 * r:.2f}%" for v, r in rate.items())
    verdict("AC4 protection ordering", ok,
            f"{pct}; {', '.join(f'{k}={v}' for k, v in checks.items())}; observed {order} (reported only)")
    assert ok


def test_ac05_netlist_single_domain_stuck_at(bits, golden, verdict):
    fails, forced = [], 0
    for v in VOTED:
        nl = camp.build_variant(v)
        sim = NetlistSim(nl)
        assert np.array_equal(sim.set_golden(tmr_stimuli(bits)), golden)
        for c in nl:
            if c.domain is not Domain.D0:
                continue
            for mode in ("0", "1"):
                forced += 1
                if not np.array_equal(sim.forced_outputs(c.name, mode), golden):
                    fails.append((v, c.name, mode))
    ok = not fails
    verdict("AC5 netlist stuck-at in D0", ok, f"{forced} forced cell outputs over p1/p2/p3, {len(fails)} failures")
    assert ok


def test_ac06_scrubbing_recovery(impl, routing_campaign, bits, verdict):
    im = impl("p2")
    stim = camp.design_stimuli(im, bits)
    wrong = [r for r in routing_campaign.get("TMR_p2").records if r.verdict is Verdict.WRONG]
    worst, bad = 0, []
    for r in wrong:
        res = camp.scrub_and_verify(im, r.address, stim)
        if res.recovered_within is None or res.recovered_within > 11:
            bad.append(str(r.address))
        else:
            worst = max(worst, res.recovered_within)
    ok = not bad
    verdict("AC6 scrubbing recovery", ok,
            f"{len(wrong)} WrongAnswer faults in the P2 sample, {len(wrong) - len(bad)} recovered, worst {worst} cycles")
    assert ok


def test_ac07_bitstream_codec(arch, verdict):
    rng = np.random.default_rng(2024)
    bad = 0
    for k in range(1000):
        cfg = rng.integers(0, 2, arch.total_bits, dtype=np.uint8)
        back = decode_bitstream(arch, encode_bitstream(arch, cfg))
        if not np.array_equal(back, cfg):
            bad += 1
        elif k % 100 == 0 and not np.array_equal(from_bytes(arch, to_bytes(arch, cfg)), cfg):
            bad += 1
    ok = bad == 0
    verdict("AC7 bitstream codec", ok, f"1000 random configurations of {arch.total_bits} bits, {bad} mismatches")
    assert ok


def test_ac08_router_legality(impl, verdict):
    problems = {}
    for v in camp.VARIANTS:
        for fp in (False, True):
            p = audit_implementation(impl(v, fp))
            if p:
                problems[(v, fp)] = p[:3]
    ok = not problems
    verdict("AC8 router legality", ok, f"10 implementations audited, problems: {problems or 'none'}")
    assert ok


def _digest(report) -> str:
    h = hashlib.sha256()
    for fmt in camp.FORMATS:
        h.update(camp.render_report(report, fmt).encode())
    return h.hexdigest()


def test_ac09_determinism(verdict):
    kw = dict(seed=11, sample=300, flt="routing", scrub=True)
    a = camp.full_pipeline(**kw)
    b = camp.full_pipeline(**kw)
    ha, hb = _digest(a), _digest(b)
    ok = ha == hb
    verdict("AC9 determinism", ok, f"two fresh pipeline runs, sha256 {ha[:16]} vs {hb[:16]}")
    assert ok


def test_ac10_report_arithmetic(verdict):
    fixtures = [(19401, 190, "0.98"), (17515, 706, "4.03"), (18000, 2268, "12.60")]
    rep = camp.CampaignReport([DesignResult(n, inj, w) for n, (inj, w, _) in zip(camp.DESIGN_ORDER, fixtures)])
    rows = camp.render_report(rep, "table").splitlines()[2:5]
    got = [row.split()[-1] for row in rows]
    want = [t for _, _, t in fixtures]
    ok = got == want and [f"{d.wrong_pct:.2f}" for d in rep.designs] == want
    verdict("AC10 report arithmetic", ok, ", ".join(f"{i}/{w} -> {g}%" for (i, w, _), g in zip(fixtures, got)))
    assert ok


def test_ac11_resource_accounting(impl, verdict):
    sums, share = {}, None
    for v in camp.VARIANTS:
        st = resource_stats(impl(v))
        sums[v] = sum(st.percentages.values())
        if v == "std":
            share = st.routing_share
    ok = all(abs(s - 100) <= 0.1 for s in sums.values()) and share >= 70
    verdict("AC11 resource accounting", ok,
            f"percentage sums {min(sums.values()):.3f}..{max(sums.values()):.3f}, standard routing share {share:.1f}%")
    assert ok
