"""Pipeline stage artifacts: canonical JSONL readers and writers.

Stages communicate only through these files, so any stage can be replaced by
hand-crafted fixtures. Numeric values are serialized as decimal strings to
keep them exact. Writers emit a canonical byte form (fixed key order,
compact separators, trailing newline) so identical runs produce identical
files.
"""

from __future__ import annotations

import json
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Iterable

from .augment import (FAMILY_RANDOM, FAMILY_RULE, RULES, AugmentationSpec,
                      EvaluationUnit, Variant)
from .corpus import BaseSentence
from .errors import MissingInputError, SchemaError
from .numerals import FinNumLabel, label_is_legal, mention_at
from .validate import ValidityReport


def dumps_canonical(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def write_jsonl(path: Path, records: Iterable[dict]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(dumps_canonical(record) + "\n")
            count += 1
    return count


def read_jsonl(path: Path) -> Iterable[tuple[int, dict]]:
    if not path.exists():
        raise MissingInputError(f"input file {path} does not exist")
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"invalid JSON ({exc.msg})", str(path), line_no)
            if not isinstance(record, dict):
                raise SchemaError("record is not a JSON object", str(path), line_no)
            yield line_no, record


def _decimal(raw, where: str, line_no: int) -> Decimal:
    try:
        return Decimal(str(raw))
    except InvalidOperation:
        raise SchemaError(f"bad decimal value {raw!r}", where, line_no)


# ---------------------------------------------------------------------------
# sentences.jsonl

def sentence_record(sentence: BaseSentence) -> dict:
    mentions = []
    for m in sentence.mentions:
        rec = {"start": m.start, "end": m.end, "raw": m.raw,
               "value": str(m.value), "kind": m.kind,
               "category": m.label.category if m.label else None,
               "subcategory": m.label.subcategory if m.label else None}
        mentions.append(rec)
    return {"id": sentence.id, "text": sentence.text,
            "source": sentence.source, "mentions": mentions}


def write_sentences(path: Path, sentences: list[BaseSentence]) -> int:
    return write_jsonl(path, (sentence_record(s) for s in sentences))


def read_sentences(path: Path) -> list[BaseSentence]:
    """Rebuild sentences from the extract artifact.

    Mention styles are not serialized; each mention is re-parsed at its
    recorded span and must reproduce the recorded raw/value/kind exactly,
    otherwise the record is rejected with its line number.
    """
    sentences: list[BaseSentence] = []
    seen: set[str] = set()
    for line_no, rec in read_jsonl(path):
        where = str(path)
        for key in ("id", "text"):
            if not isinstance(rec.get(key), str):
                raise SchemaError(f"record needs string {key!r}", where, line_no)
        if rec["id"] in seen:
            raise SchemaError(f"duplicate id {rec['id']!r}", where, line_no)
        seen.add(rec["id"])
        sentence = BaseSentence(id=rec["id"], text=rec["text"],
                                source=rec.get("source", "other"), mentions=[])
        for i, mrec in enumerate(rec.get("mentions", [])):
            if not isinstance(mrec, dict) or not isinstance(mrec.get("start"), int):
                raise SchemaError(f"mention {i} malformed", where, line_no)
            mention = mention_at(sentence.text, mrec["start"])
            if mention is None:
                raise SchemaError(
                    f"mention {i}: no numeral parses at offset {mrec['start']}",
                    where, line_no)
            value = _decimal(mrec.get("value"), where, line_no)
            if (mention.raw != mrec.get("raw") or mention.value != value
                    or mention.kind != mrec.get("kind")
                    or mention.end != mrec.get("end")):
                raise SchemaError(
                    f"mention {i}: recorded surface {mrec.get('raw')!r} does not "
                    f"match parsed {mention.raw!r}", where, line_no)
            category, subcategory = mrec.get("category"), mrec.get("subcategory")
            if category is not None:
                label = FinNumLabel(category, subcategory)
                if not label_is_legal(label):
                    raise SchemaError(
                        f"mention {i}: illegal label {category}/{subcategory}",
                        where, line_no)
                mention.label = label
            sentence.mentions.append(mention)
        sentences.append(sentence)
    return sentences


# ---------------------------------------------------------------------------
# units.jsonl

def unit_record(unit: EvaluationUnit) -> dict:
    return {"unit_id": unit.unit_id,
            "base_id": unit.base.id,
            "target_span": [unit.mention.start, unit.mention.end],
            "family": unit.spec.family,
            "rule": unit.spec.rule,
            "variants": [{"text": v.text, "value": str(v.value)}
                         for v in unit.variants]}


def write_units(path: Path, units: list[EvaluationUnit]) -> int:
    return write_jsonl(path, (unit_record(u) for u in units))


def read_units(path: Path, sentences: list[BaseSentence]) -> list[EvaluationUnit]:
    by_id = {s.id: s for s in sentences}
    units: list[EvaluationUnit] = []
    seen: set[str] = set()
    for line_no, rec in read_jsonl(path):
        where = str(path)
        unit_id = rec.get("unit_id")
        if not isinstance(unit_id, str) or not unit_id:
            raise SchemaError("record needs string 'unit_id'", where, line_no)
        if unit_id in seen:
            raise SchemaError(f"duplicate unit_id {unit_id!r}", where, line_no)
        seen.add(unit_id)
        base = by_id.get(rec.get("base_id"))
        if base is None:
            raise SchemaError(f"unknown base_id {rec.get('base_id')!r}",
                              where, line_no)
        span = rec.get("target_span")
        if (not isinstance(span, list) or len(span) != 2
                or not all(isinstance(x, int) for x in span)):
            raise SchemaError("target_span must be [start, end]", where, line_no)
        target = next((i for i, m in enumerate(base.mentions)
                       if [m.start, m.end] == span), None)
        if target is None:
            raise SchemaError(f"target_span {span} matches no mention of "
                              f"{base.id!r}", where, line_no)
        family = rec.get("family")
        rule = rec.get("rule")
        if family not in (FAMILY_RANDOM, FAMILY_RULE):
            raise SchemaError(f"unknown family {family!r}", where, line_no)
        if family == FAMILY_RULE and rule not in RULES:
            raise SchemaError(f"unknown rule {rule!r}", where, line_no)
        variants = []
        for i, vrec in enumerate(rec.get("variants", [])):
            if not isinstance(vrec, dict) or not isinstance(vrec.get("text"), str):
                raise SchemaError(f"variant {i} malformed", where, line_no)
            variants.append(Variant(text=vrec["text"],
                                    value=_decimal(vrec.get("value"), where, line_no)))
        if not variants:
            raise SchemaError("unit has no variants", where, line_no)
        units.append(EvaluationUnit(
            unit_id=unit_id, base=base, target=target,
            spec=AugmentationSpec(family, rule if family == FAMILY_RULE else None),
            variants=variants))
    return units


# ---------------------------------------------------------------------------
# validity.jsonl

def validity_record(report: ValidityReport) -> dict:
    return {"unit_id": report.unit_id, "scores": report.scores,
            "kept": report.kept, "reasons": report.reasons}


def write_validity(path: Path, reports: list[ValidityReport]) -> int:
    return write_jsonl(path, (validity_record(r) for r in reports))


def read_validity(path: Path) -> list[ValidityReport]:
    reports = []
    for line_no, rec in read_jsonl(path):
        where = str(path)
        if not isinstance(rec.get("unit_id"), str):
            raise SchemaError("record needs string 'unit_id'", where, line_no)
        scores = rec.get("scores")
        if (not isinstance(scores, list)
                or not all(isinstance(s, (int, float)) for s in scores)):
            raise SchemaError("'scores' must be a list of numbers", where, line_no)
        if not isinstance(rec.get("kept"), bool):
            raise SchemaError("'kept' must be a boolean", where, line_no)
        reports.append(ValidityReport(
            unit_id=rec["unit_id"], scores=[float(s) for s in scores],
            kept=rec["kept"], reasons=list(rec.get("reasons", []))))
    return reports


__all__ = ["dumps_canonical", "read_jsonl", "read_sentences", "read_units",
           "read_validity", "sentence_record", "unit_record",
           "validity_record", "write_jsonl", "write_sentences", "write_units",
           "write_validity"]
