"""``tmr-forge`` command line: synth | tmr | pnr | inject | report."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import campaign as camp
from .fabric.arch import ArchParams, make_arch
from .faultsim.effects import records_to_csv
from .netlist import io as nio
from .netlist.fir import FirSpec, build_fir
from .pnr.implement import Implementation, audit_implementation, implement
from .tmr import PartitionStrategy, apply_partition

EXIT_GOLDEN = 3


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def _fir_spec(args) -> FirSpec:
    if not args.coeffs:
        return FirSpec()
    coeffs = tuple(int(c) for c in args.coeffs.split(","))
    return FirSpec(coefficients=coeffs)


def cmd_synth(args) -> int:
    spec = _fir_spec(args)
    spec.check()
    nio.save(build_fir(spec, name=args.name), args.output)
    return 0


def cmd_tmr(args) -> int:
    cuts = ()
    if args.cuts:
        data = json.loads(Path(args.cuts).read_text())
        cuts = data["cuts"] if isinstance(data, dict) else data
    strategy = PartitionStrategy.parse(args.strategy, cuts)
    nio.save(apply_partition(nio.load(args.input), strategy), args.output)
    return 0


def cmd_pnr(args) -> int:
    params = ArchParams.load(args.arch) if args.arch else ArchParams()
    impl = implement(nio.load(args.input), make_arch(params), floorplan=args.floorplan)
    problems = audit_implementation(impl)
    if problems:
        for p in problems[:20]:
            print(p, file=sys.stderr)
        return 1
    impl.save(args.output)
    return 0


def cmd_inject(args) -> int:
    impl = Implementation.load(args.impl)
    stim = camp.StimulusSpec(seed=args.stimulus_seed, samples=args.samples)
    fir = FirSpec()
    bits = camp.design_stimuli(impl, camp.input_bits(stim, fir))
    fl = camp.build_fault_list(impl, args.filter, args.seed, args.sample)
    try:
        report = camp.run_campaign(impl, camp.golden_trace(stim, fir), bits, fl, scrub=args.scrub)
    except camp.GoldenIntegrityError as e:
        print(f"golden integrity failure: {e}", file=sys.stderr)
        return EXIT_GOLDEN
    report.stimuli = stim.to_dict()
    if args.records:
        Path(args.records).write_text(records_to_csv(report.designs[0].records))
    text = camp.render_report(report, args.format, args.output)
    if not args.output:
        sys.stdout.write(text)
    return 0


def _read_report(path: str) -> camp.CampaignReport:
    text = Path(path).read_text()
    if path.endswith(".csv"):
        return camp.report_from_csv(text)
    return camp.report_from_json(text)


def cmd_report(args) -> int:
    parts = [_read_report(p) for p in args.reports]
    report = parts[0].merge(*parts[1:]) if parts else camp.CampaignReport()
    text = camp.render_report(report, args.format, args.output)
    if not args.output:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tmr-forge", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="build the FIR netlist")
    p.add_argument("--coeffs", help="comma-separated tap coefficients")
    p.add_argument("--name", default="fir")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("tmr", help="triplicate and insert voters")
    p.add_argument("--strategy", required=True, choices=["p1", "p2", "p3", "p3_nv", "custom"])
    p.add_argument("--cuts", help="JSON list of net ids (for --strategy custom)")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_tmr)

    p = sub.add_parser("pnr", help="place, route and write bitstream + sidecar")
    p.add_argument("--arch", help="TOML or JSON fabric parameters")
    p.add_argument("--floorplan", type=_on_off, default=False, metavar="on|off")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_pnr)

    p = sub.add_parser("inject", help="run a fault-injection campaign on one implementation")
    p.add_argument("--impl", required=True)
    p.add_argument("--seed", type=int, default=0, help="fault sampling seed")
    p.add_argument("--sample", type=int, default=None, help="faults to draw (default: all)")
    p.add_argument("--filter", default="all", help="all, routing, lut, ff, clb_mux or an effect class")
    p.add_argument("--scrub", type=_on_off, default=False, metavar="on|off")
    p.add_argument("--stimulus-seed", type=int, default=camp.StimulusSpec.seed)
    p.add_argument("--samples", type=int, default=camp.StimulusSpec.samples, help="random input samples")
    p.add_argument("--format", choices=camp.FORMATS, default="json")
    p.add_argument("--records", help="also write per-fault records as CSV")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("report", help="merge campaign reports and render them")
    p.add_argument("reports", nargs="+")
    p.add_argument("--format", choices=camp.FORMATS, default="table")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
