"""Aggregate report assembly and rendering.

The text layout mirrors the familiar three-protocol results table: one row
per scorer, column groups Triplet (Accuracy) / Listwise (Kendall's tau_b) /
Cross-Pair (Accuracy), each split into Random and Rule-based, followed by
per-category strata and exclusion tallies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .augment import FAMILY_RANDOM, FAMILY_RULE, EvaluationUnit
from .metrics import Scorer
from .protocols import (ProtocolResult, cross_pair_accuracy, cross_pair_sample,
                        listwise_concordant_fraction, listwise_eval,
                        triplet_accuracy)

PROTOCOL_TITLES = [("triplet", "Triplet (Accuracy)"),
                   ("listwise", "Listwise (Kendall's tau_b)"),
                   ("cross_pair", "Cross-Pair (Accuracy)")]


@dataclass
class MetricReport:
    scorer: str
    distance_mode: str
    seed: int
    cross_pairs: int
    unit_counts: dict[str, int]
    triplet: ProtocolResult
    listwise: ProtocolResult
    cross_pair: ProtocolResult
    listwise_pairwise_agreement: Optional[float] = None

    def protocol(self, name: str) -> ProtocolResult:
        return {"triplet": self.triplet, "listwise": self.listwise,
                "cross_pair": self.cross_pair}[name]


def evaluate_all(units: list[EvaluationUnit], scorer: Scorer, scorer_name: str,
                 distance_mode: str, seed: int, cross_pairs: int = 10_000) -> MetricReport:
    """Run the three protocols over units already carrying distances."""
    unit_counts: dict[str, int] = {}
    for unit in units:
        unit_counts[unit.spec.family] = unit_counts.get(unit.spec.family, 0) + 1

    triplet = triplet_accuracy(units, scorer)
    listwise = listwise_eval(units, scorer)
    agreement = listwise_concordant_fraction(units, scorer)

    # cross-pair draws stay inside one augmentation family, matching the
    # report's Random / Rule-based split
    family_results: list[ProtocolResult] = []
    for family in (FAMILY_RANDOM, FAMILY_RULE):
        members = [u for u in units if u.spec.family == family]
        categories = {}
        for u in members:
            categories.setdefault(u.category, []).append(u)
        if not any(len(v) >= 2 for v in categories.values()):
            continue
        pairs = cross_pair_sample(members, cross_pairs, seed)
        family_results.append(cross_pair_accuracy(pairs, members, scorer))

    cross = _merge_results("cross_pair", family_results)
    return MetricReport(scorer=scorer_name, distance_mode=distance_mode,
                        seed=seed, cross_pairs=cross_pairs,
                        unit_counts=dict(sorted(unit_counts.items())),
                        triplet=triplet, listwise=listwise, cross_pair=cross,
                        listwise_pairwise_agreement=agreement)


def _merge_results(name: str, parts: list[ProtocolResult]) -> ProtocolResult:
    total = sum(p.evaluated for p in parts)
    weighted = sum(p.value * p.evaluated for p in parts if p.value is not None)
    excluded: dict[str, int] = {}
    by_stratum: dict[str, ProtocolResult] = {}
    for part in parts:
        for reason, count in part.excluded.items():
            excluded[reason] = excluded.get(reason, 0) + count
        by_stratum.update(part.by_stratum)
    value = weighted / total if total else None
    return ProtocolResult(name=name, value=value, evaluated=total,
                          excluded=dict(sorted(excluded.items())),
                          by_stratum=dict(sorted(by_stratum.items())))


# ---------------------------------------------------------------------------
# serialization

def _result_dict(result: ProtocolResult) -> dict:
    out = {"value": _round(result.value), "evaluated": result.evaluated,
           "excluded": result.excluded}
    if result.by_stratum:
        out["by_stratum"] = {k: _result_dict(v) for k, v in result.by_stratum.items()}
    return out


def _round(value: Optional[float]) -> Optional[float]:
    return round(value, 6) if value is not None else None


def report_to_dict(report: MetricReport) -> dict:
    return {
        "scorer": report.scorer,
        "distance_mode": report.distance_mode,
        "seed": report.seed,
        "cross_pairs": report.cross_pairs,
        "unit_counts": report.unit_counts,
        "listwise_pairwise_agreement": _round(report.listwise_pairwise_agreement),
        "protocols": {name: _result_dict(report.protocol(name))
                      for name, _ in PROTOCOL_TITLES},
    }


def report_from_dict(data: dict) -> MetricReport:
    def result(d: dict, name: str) -> ProtocolResult:
        return ProtocolResult(
            name=name, value=d.get("value"), evaluated=d.get("evaluated", 0),
            excluded=d.get("excluded", {}),
            by_stratum={k: result(v, name)
                        for k, v in d.get("by_stratum", {}).items()})

    protocols = data["protocols"]
    return MetricReport(
        scorer=data["scorer"], distance_mode=data["distance_mode"],
        seed=data["seed"], cross_pairs=data["cross_pairs"],
        unit_counts=data["unit_counts"],
        triplet=result(protocols["triplet"], "triplet"),
        listwise=result(protocols["listwise"], "listwise"),
        cross_pair=result(protocols["cross_pair"], "cross_pair"),
        listwise_pairwise_agreement=data.get("listwise_pairwise_agreement"))


# ---------------------------------------------------------------------------
# text table

def _fmt(value: Optional[float]) -> str:
    return f"{value:.4f}" if value is not None else "--"


def render_text(report: MetricReport) -> str:
    families = [(FAMILY_RANDOM, "Random"), (FAMILY_RULE, "Rule-based")]
    lines = []
    lines.append("Numerical sensitivity report")
    lines.append(f"distance mode: {report.distance_mode}   seed: {report.seed}   "
                 f"units: {report.unit_counts}")
    lines.append("")

    header_groups = "".join(f"{title:^24}" for _, title in PROTOCOL_TITLES)
    lines.append(f"{'Scorer':<18}{header_groups}")
    sub = "".join(f"{'Random':>12}{'Rule-based':>12}" for _ in PROTOCOL_TITLES)
    lines.append(f"{'':<18}{sub}")
    row = f"{report.scorer:<18}"
    for name, _ in PROTOCOL_TITLES:
        result = report.protocol(name)
        for family, _label in families:
            stratum = result.by_stratum.get(family)
            row += f"{_fmt(stratum.value if stratum else None):>12}"
    lines.append(row)
    lines.append("")

    lines.append(f"overall: triplet {_fmt(report.triplet.value)}   "
                 f"listwise {_fmt(report.listwise.value)}   "
                 f"cross-pair {_fmt(report.cross_pair.value)}   "
                 f"listwise pairwise agreement "
                 f"{_fmt(report.listwise_pairwise_agreement)}")
    lines.append("")

    lines.append("Per-category strata")
    lines.append(f"{'stratum':<34}{'triplet':>10}{'listwise':>10}{'cross-pair':>12}"
                 f"{'n(tri)':>8}{'n(list)':>9}{'n(cross)':>10}")
    strata = sorted(set(report.triplet.by_stratum)
                    | set(report.listwise.by_stratum)
                    | set(report.cross_pair.by_stratum))
    for stratum in strata:
        if "/" not in stratum:
            continue
        t = report.triplet.by_stratum.get(stratum)
        l = report.listwise.by_stratum.get(stratum)
        c = report.cross_pair.by_stratum.get(stratum)
        lines.append(f"{stratum:<34}"
                     f"{_fmt(t.value if t else None):>10}"
                     f"{_fmt(l.value if l else None):>10}"
                     f"{_fmt(c.value if c else None):>12}"
                     f"{t.evaluated if t else 0:>8}"
                     f"{l.evaluated if l else 0:>9}"
                     f"{c.evaluated if c else 0:>10}")
    lines.append("")

    lines.append("Exclusions")
    for name, _ in PROTOCOL_TITLES:
        result = report.protocol(name)
        if result.excluded:
            detail = ", ".join(f"{k}={v}" for k, v in result.excluded.items())
            lines.append(f"  {name}: {detail}")
        else:
            lines.append(f"  {name}: none")
    return "\n".join(lines) + "\n"


__all__ = ["MetricReport", "evaluate_all", "render_text", "report_from_dict",
           "report_to_dict"]
