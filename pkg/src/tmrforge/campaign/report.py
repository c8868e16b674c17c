"""Campaign results and their csv / json / text-table renderings."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from ..faultsim.effects import EffectClass, FaultRecord, Verdict

DESIGN_ORDER = ("Standard", "TMR_p1", "TMR_p2", "TMR_p3", "TMR_p3_nv")
CLASSES = [e.value for e in EffectClass]
RESOURCE_KEYS = ("routing", "lut", "ff", "clb_mux")
FORMATS = ("csv", "json", "table")


def design_label(name: str) -> str:
    """Display name of an implemented netlist (``fir`` -> Standard, ``fir_p2`` -> TMR_p2)."""
    for suffix in ("p3_nv", "p1", "p2", "p3", "custom"):
        if name.endswith("_" + suffix):
            return f"TMR_{suffix}"
    return "Standard"


def percent(part: int, whole: int) -> float:
    return round(100.0 * part / whole, 2) if whole else 0.0


def _zero_hist() -> dict[str, int]:
    return {c: 0 for c in CLASSES}


@dataclass
class DesignResult:
    design: str
    injected: int = 0
    wrong: int = 0
    effects_all: dict[str, int] = field(default_factory=_zero_hist)
    effects_wrong: dict[str, int] = field(default_factory=_zero_hist)
    resources: dict = field(default_factory=dict)
    seed: int = 0
    fault_filter: str = "all"
    candidates: int = 0
    scrub: dict = field(default_factory=dict)  # checked / recovered / worst cycles
    records: list[FaultRecord] = field(default_factory=list, repr=False, compare=False)

    @property
    def wrong_pct(self) -> float:
        return percent(self.wrong, self.injected)

    @classmethod
    def from_records(cls, design: str, records, resources=None, seed=0, fault_filter="all",
                     candidates=0, scrubbed=False) -> "DesignResult":
        r = cls(design, resources=dict(resources or {}), seed=seed, fault_filter=fault_filter,
                candidates=candidates, records=list(records))
        worst, rec_ok, checked = 0, 0, 0
        for rec in records:
            r.injected += 1
            r.effects_all[rec.effect.value] += 1
            if rec.verdict is Verdict.WRONG:
                r.wrong += 1
                r.effects_wrong[rec.effect.value] += 1
                if scrubbed:
                    checked += 1
                    if rec.recovered_within is not None:
                        rec_ok += 1
                        worst = max(worst, rec.recovered_within)
        if scrubbed:
            r.scrub = {"checked": checked, "recovered": rec_ok, "worst_cycles": worst}
        return r

    def to_dict(self) -> dict:
        return {
            "design": self.design,
            "injected": self.injected,
            "wrong": self.wrong,
            "wrong_pct": self.wrong_pct,
            "candidates": self.candidates,
            "filter": self.fault_filter,
            "seed": self.seed,
            "effects_all": dict(self.effects_all),
            "effects_wrong": dict(self.effects_wrong),
            "resources": self.resources,
            "scrub": dict(self.scrub),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DesignResult":
        return cls(
            d["design"], int(d["injected"]), int(d["wrong"]),
            {**_zero_hist(), **{k: int(v) for k, v in d["effects_all"].items()}},
            {**_zero_hist(), **{k: int(v) for k, v in d["effects_wrong"].items()}},
            d.get("resources", {}), int(d.get("seed", 0)), d.get("filter", "all"),
            int(d.get("candidates", 0)), dict(d.get("scrub", {})),
        )


@dataclass
class CampaignReport:
    designs: list[DesignResult] = field(default_factory=list)
    arch_hash: str = ""
    seed: int = 0
    runtime: float = 0.0  # wall clock; deliberately left out of every rendering
    stimuli: dict = field(default_factory=dict)

    def merge(self, *others: "CampaignReport") -> "CampaignReport":
        out = CampaignReport(list(self.designs), self.arch_hash, self.seed, self.runtime, dict(self.stimuli))
        for o in others:
            if out.arch_hash and o.arch_hash and o.arch_hash != out.arch_hash:
                raise ValueError("cannot merge reports from different fabrics")
            out.arch_hash = out.arch_hash or o.arch_hash
            out.designs.extend(o.designs)
            out.runtime += o.runtime
            out.stimuli = out.stimuli or dict(o.stimuli)
        rank = {n: i for i, n in enumerate(DESIGN_ORDER)}
        out.designs.sort(key=lambda d: (rank.get(d.design, len(rank)), d.design))
        return out

    def get(self, design: str) -> DesignResult:
        for d in self.designs:
            if d.design == design:
                return d
        raise KeyError(design)

    def to_dict(self) -> dict:
        return {
            "arch_hash": self.arch_hash,
            "seed": self.seed,
            "stimuli": self.stimuli,
            "designs": [d.to_dict() for d in self.designs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignReport":
        return cls([DesignResult.from_dict(x) for x in d.get("designs", [])],
                   d.get("arch_hash", ""), int(d.get("seed", 0)), 0.0, dict(d.get("stimuli", {})))


CSV_FIELDS = (
    ["design", "injected", "wrong", "wrong_pct", "candidates", "filter", "seed", "campaign_seed", "arch_hash",
     "stimuli"]
    + [f"all_{c}" for c in CLASSES]
    + [f"wrong_{c}" for c in CLASSES]
    + ["resources", "scrub"]
)


def _to_csv(report: CampaignReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    stim = json.dumps(report.stimuli, sort_keys=True)
    for d in report.designs:
        w.writerow(
            [d.design, d.injected, d.wrong, f"{d.wrong_pct:.2f}", d.candidates, d.fault_filter, d.seed,
             report.seed, report.arch_hash, stim]
            + [d.effects_all[c] for c in CLASSES]
            + [d.effects_wrong[c] for c in CLASSES]
            + [json.dumps(d.resources, sort_keys=True), json.dumps(d.scrub, sort_keys=True)]
        )
    return buf.getvalue()


def report_from_csv(text: str) -> CampaignReport:
    rows = list(csv.DictReader(io.StringIO(text)))
    report = CampaignReport()
    for row in rows:
        report.arch_hash = row["arch_hash"]
        report.stimuli = json.loads(row["stimuli"] or "{}")
        d = DesignResult(
            row["design"], int(row["injected"]), int(row["wrong"]),
            {c: int(row[f"all_{c}"]) for c in CLASSES},
            {c: int(row[f"wrong_{c}"]) for c in CLASSES},
            json.loads(row["resources"] or "{}"), int(row["seed"]), row["filter"],
            int(row["candidates"]), json.loads(row["scrub"] or "{}"),
        )
        report.seed = int(row["campaign_seed"])
        report.designs.append(d)
    return report


def report_from_json(text: str) -> CampaignReport:
    return CampaignReport.from_dict(json.loads(text))


def _grid(header: list[str], rows: list[list[str]]) -> list[str]:
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)] if rows else [len(h) for h in header]

    def fmt(r):
        return "  ".join(str(x).ljust(w) if i == 0 else str(x).rjust(w) for i, (x, w) in enumerate(zip(r, widths)))

    return [fmt(header), "  ".join("-" * w for w in widths)] + [fmt(r) for r in rows]


def _table(report: CampaignReport) -> str:
    lines = _grid(
        ["Design", "Injected", "Wrong #", "Wrong %"],
        [[d.design, f"{d.injected:,}", f"{d.wrong:,}", f"{d.wrong_pct:.2f}"] for d in report.designs],
    )
    if not report.designs:
        return "\n".join(lines) + "\n"
    for title, attr in (("Effects, all injected faults", "effects_all"),
                        ("Effects, faults with a wrong answer", "effects_wrong")):
        lines += ["", title]
        header = ["Class"]
        for d in report.designs:
            header += [f"{d.design} #", "%"]
        rows = []
        for c in CLASSES:
            row = [c]
            for d in report.designs:
                hist = getattr(d, attr)
                row += [str(hist[c]), f"{percent(hist[c], sum(hist.values())):.0f}"]
            rows.append(row)
        total = ["Total"]
        for d in report.designs:
            total += [str(sum(getattr(d, attr).values())), ""]
        lines += _grid(header, rows + [total])
    scrubbed = [d for d in report.designs if d.scrub]
    if scrubbed:
        lines += ["", "Scrubbing"]
        lines += _grid(
            ["Design", "Checked", "Recovered", "Worst cycles"],
            [[d.design, str(d.scrub["checked"]), str(d.scrub["recovered"]), str(d.scrub["worst_cycles"])]
             for d in scrubbed],
        )
    return "\n".join(lines) + "\n"


def render_report(report: CampaignReport, fmt: str = "table", path=None) -> str:
    """Render ``report``; also write it to ``path`` when given."""
    if fmt == "csv":
        text = _to_csv(report)
    elif fmt == "json":
        text = json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"
    elif fmt == "table":
        text = _table(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}; choose from {', '.join(FORMATS)}")
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
