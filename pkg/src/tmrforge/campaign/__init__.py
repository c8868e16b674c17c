"""Fault lists, injection campaigns, scrubbing checks and reports."""

from __future__ import annotations

from ..fabric.arch import make_arch
from ..netlist.fir import FirSpec, build_fir
from ..pnr.implement import implement
from ..tmr import STRATEGIES, apply_partition
from .faultlist import FaultList, build_fault_list, filter_indices, impl_id
from .report import (DESIGN_ORDER, FORMATS, CampaignReport, DesignResult, design_label, percent,
                     render_report, report_from_csv, report_from_json)
from .runner import (WORKERS_ENV, GoldenIntegrityError, ScrubResult, check_golden, pipeline_depth,
                     run_campaign, scrub_and_verify, worker_count)
from .stimuli import StimulusSpec, design_stimuli, golden_trace, input_bits

VARIANTS = ("std", "p1", "p2", "p3", "p3_nv")


def build_variant(variant: str, fir: FirSpec = FirSpec()):
    """Netlist of one filter variant: ``std`` or a partition strategy name."""
    base = build_fir(fir)
    if variant == "std":
        return base
    return apply_partition(base, STRATEGIES[variant])


def campaign(impls: dict, stimuli: StimulusSpec = StimulusSpec(), seed: int = 0, sample: int | None = 2000,
             flt: str = "routing", scrub: bool = False, fir: FirSpec = FirSpec()) -> CampaignReport:
    """One campaign per implementation, merged into a single report."""
    bits = input_bits(stimuli, fir)
    golden = golden_trace(stimuli, fir)
    parts = []
    for impl in impls.values():
        fl = build_fault_list(impl, flt, seed, sample)
        parts.append(run_campaign(impl, golden, design_stimuli(impl, bits), fl, scrub=scrub))
    report = parts[0].merge(*parts[1:]) if parts else CampaignReport(seed=seed)
    report.seed = seed
    report.stimuli = stimuli.to_dict()
    return report


def full_pipeline(variants=VARIANTS, arch=None, floorplan: bool = False, **kw) -> CampaignReport:
    """Build, triplicate, implement and inject every variant from scratch."""
    arch = arch or make_arch()
    impls = {v: implement(build_variant(v), arch, floorplan=floorplan) for v in variants}
    return campaign(impls, **kw)


__all__ = [
    "FaultList", "build_fault_list", "filter_indices", "impl_id",
    "DESIGN_ORDER", "FORMATS", "CampaignReport", "DesignResult", "design_label", "percent",
    "render_report", "report_from_csv", "report_from_json",
    "WORKERS_ENV", "GoldenIntegrityError", "ScrubResult", "check_golden", "pipeline_depth",
    "run_campaign", "scrub_and_verify", "worker_count",
    "StimulusSpec", "design_stimuli", "golden_trace", "input_bits",
    "VARIANTS", "build_variant", "campaign", "full_pipeline",
]
