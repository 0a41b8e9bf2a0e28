"""Variant validity scoring and the unit-level rejection rule.

The builtin validator is a deterministic approximation of an LLM judge: it
checks calendar conventions, clock-time formatting, and structural integrity
of the perturbed span, plus a shallow plausibility heuristic for absolute
percentages. An external validator adapter can override its scores per
variant; on adapter failure the builtin score stands and the fallback is
recorded.
"""

from __future__ import annotations

import calendar
import logging
from dataclasses import dataclass, field
from typing import Optional

from .augment import EvaluationUnit
from .errors import NumprobeError
from .numerals import (KIND_TIME, LENIENT_DATE_RE, LENIENT_TIME_RE,
                       MONTH_BY_NAME, NumeralMention, mention_at)

logger = logging.getLogger(__name__)

THRESHOLD = 0.5
MAX_BAD = 3

IMPLAUSIBLE_SCORE = 0.4


@dataclass
class ValidityReport:
    unit_id: str
    scores: list[float]
    kept: bool
    reasons: list[str] = field(default_factory=list)


def _calendar_reason(text: str, start: int) -> Optional[str]:
    match = LENIENT_DATE_RE.match(text, start)
    if not match:
        return None
    month = MONTH_BY_NAME[match["month"].lower()]
    year = int(match["year"]) if match["year"] else 2000
    day = int(match["day"])
    if day < 1 or day > calendar.monthrange(year, month)[1]:
        return (f"calendar violation: day {day} does not exist in "
                f"{match['month']} {year}")
    return None


def _time_reason(text: str, start: int) -> Optional[str]:
    match = LENIENT_TIME_RE.match(text, start)
    if not match:
        return None
    hour, minute = int(match["h"]), int(match["min"])
    if len(match["min"]) != 2:
        return (f"time format {match.group(0).strip()!r} is invalid; "
                f"minutes should have two digits")
    if minute > 59:
        return f"minute component {minute} out of range"
    if match["sec"] and (len(match["sec"]) != 2 or int(match["sec"]) > 59):
        return f"second component {match['sec']!r} out of range"
    if match["mer"] and not 1 <= hour <= 12:
        return f"hour {hour} invalid with AM/PM"
    if not match["mer"] and hour > 23:
        return f"hour {hour} out of range"
    return None


def builtin_validate(variant_text: str, variant_value,
                     mention: NumeralMention) -> tuple[float, str]:
    """Score one variant in [0, 1]; returns (score, reason).

    0.0 for calendar violations, malformed clock times, or structural
    breakage (the target span no longer parses to the expected value/kind);
    0.4 for absolute percentages above 100; 1.0 otherwise.
    """
    reason = _calendar_reason(variant_text, mention.start)
    if reason:
        return 0.0, reason
    reason = _time_reason(variant_text, mention.start) \
        if mention.kind == KIND_TIME else None
    if reason:
        return 0.0, reason

    found = mention_at(variant_text, mention.start)
    if found is None:
        return 0.0, "structural: no numeral parses at the target span"
    if found.kind != mention.kind:
        return 0.0, (f"structural: target became {found.kind} "
                     f"(was {mention.kind})")
    if variant_value is not None and found.value != variant_value:
        return 0.0, (f"structural: span parses to {found.value}, "
                     f"expected {variant_value}")

    label = mention.label
    if (label is not None and label.category == "Percentage"
            and label.subcategory == "absolute" and found.value > 100):
        return IMPLAUSIBLE_SCORE, f"implausible absolute percentage {found.value}"
    return 1.0, ""


def validate_unit(unit: EvaluationUnit, threshold: float = THRESHOLD,
                  max_bad: int = MAX_BAD, proportional: bool = False) -> ValidityReport:
    """Builtin validity report for one unit."""
    mention = unit.mention
    scores: list[float] = []
    reasons: list[str] = []
    for idx, variant in enumerate(unit.variants):
        score, reason = builtin_validate(variant.text, variant.value, mention)
        variant.validity = score
        scores.append(score)
        if reason:
            reasons.append(f"variant {idx}: {reason}")
    return _finish_report(unit, scores, reasons, threshold, max_bad, proportional)


def _finish_report(unit: EvaluationUnit, scores: list[float], reasons: list[str],
                   threshold: float, max_bad: int, proportional: bool) -> ValidityReport:
    bad = sum(1 for s in scores if s < threshold)
    limit = len(scores) / 3 if proportional else max_bad
    return ValidityReport(unit_id=unit.unit_id, scores=scores,
                          kept=bad <= limit, reasons=reasons)


def external_validate(units: list[EvaluationUnit], validator,
                      threshold: float = THRESHOLD, max_bad: int = MAX_BAD,
                      proportional: bool = False) -> list[ValidityReport]:
    """Validity reports with adapter scores overriding builtin ones.

    The adapter maps request dicts {unit_id, variant_index, sentence} to
    replies carrying either {valid: bool, reason?} or {score: number}.
    Missing or malformed replies fall back to the builtin score, and the
    fallback is recorded in the report's reasons.
    """
    requests = [{"unit_id": u.unit_id, "variant_index": i, "sentence": v.text}
                for u in units for i, v in enumerate(u.variants)]
    replies: dict[tuple[str, int], dict] = {}
    failure: Optional[str] = None
    try:
        for reply in validator(requests):
            if not isinstance(reply, dict):
                continue
            key = (reply.get("unit_id"), reply.get("variant_index"))
            if isinstance(key[0], str) and isinstance(key[1], int):
                replies[key] = reply
    except Exception as exc:
        failure = str(exc)
        logger.warning("validator adapter failed (%s); builtin scores kept", exc)

    reports = []
    for unit in units:
        report = validate_unit(unit, threshold, max_bad, proportional)
        scores = list(report.scores)
        reasons = list(report.reasons)
        if failure is not None:
            reasons.append(f"validator adapter failed: {failure}; builtin fallback")
        for idx in range(len(unit.variants)):
            reply = replies.get((unit.unit_id, idx))
            if reply is None:
                if failure is None:
                    reasons.append(f"variant {idx}: no adapter reply; builtin fallback")
                continue
            if isinstance(reply.get("score"), (int, float)):
                scores[idx] = float(reply["score"])
            elif isinstance(reply.get("valid"), bool):
                scores[idx] = 1.0 if reply["valid"] else 0.0
                if not reply["valid"] and reply.get("reason"):
                    reasons.append(f"variant {idx}: {reply['reason']}")
            else:
                reasons.append(f"variant {idx}: malformed adapter reply; "
                               f"builtin fallback")
                continue
            unit.variants[idx].validity = scores[idx]
        report = _finish_report(unit, scores, reasons, threshold, max_bad, proportional)
        reports.append(report)
    return reports


def filter_units(units: list[EvaluationUnit], reports: list[ValidityReport],
                 threshold: float = THRESHOLD, max_bad: int = MAX_BAD) -> list[EvaluationUnit]:
    """Keep units unless strictly more than max_bad variants score below
    threshold. Kept units retain all their variants, including low scorers.
    """
    by_id = {r.unit_id: r for r in reports}
    kept = []
    for unit in units:
        report = by_id.get(unit.unit_id)
        if report is None:
            raise NumprobeError(f"no validity report for unit {unit.unit_id}")
        bad = sum(1 for s in report.scores if s < threshold)
        if bad <= max_bad:
            kept.append(unit)
    return kept


__all__ = ["MAX_BAD", "THRESHOLD", "ValidityReport", "builtin_validate",
           "external_validate", "filter_units", "validate_unit"]
