"""Corpus ingestion: numeral-bearing sentences with optional FinNum labels.

The corpus is immutable after load; label assignment returns new objects, so
readers on other workers never observe partial state.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .errors import SchemaError
from .numerals import (FinNumLabel, NumeralMention, canonical_digits,
                       extract_numerals, label_is_legal)

logger = logging.getLogger(__name__)

SOURCES = ("social_media", "news", "filing", "other")

DEFAULT_LABEL = FinNumLabel("Quantity", "quantity")


@dataclass
class BaseSentence:
    id: str
    text: str
    source: str = "other"
    mentions: list[NumeralMention] = field(default_factory=list)

    def labeled_mentions(self) -> list[tuple[int, NumeralMention]]:
        return [(i, m) for i, m in enumerate(self.mentions) if m.label is not None]


def _normalize_label(category: str, subcategory: str) -> Optional[FinNumLabel]:
    """Map loosely formatted category/subcategory strings to the legal table."""
    cat = category.strip().replace(" ", "").replace("_", "")
    cat_map = {c.lower(): c for c in
               ("Monetary", "Temporal", "Percentage", "Quantity",
                "ProductNumber", "Indicator", "Option")}
    if cat.lower() not in cat_map:
        return None
    sub = subcategory.strip().lower().replace(" ", "_").replace("-", "_")
    label = FinNumLabel(cat_map[cat.lower()], sub)
    if label_is_legal(label):
        return label
    # prompt-style replies capitalize subcategories that repeat the category
    alias = {"quantity": "quantity", "productnumber": "product_number",
             "product_number": "product_number", "indicator": "indicator"}
    if sub.replace("_", "") in alias:
        label = FinNumLabel(cat_map[cat.lower()], alias[sub.replace("_", "")])
        if label_is_legal(label):
            return label
    return None


def _attach_labels(sentence: BaseSentence,
                   targets: Iterable[dict],
                   where: str,
                   override: bool = False) -> int:
    """Attach {target, category, subcategory} records to matching mentions.

    Targets are matched by digits-with-commas key against the first
    still-unlabeled mention with that key, in mention order.
    """
    attached = 0
    taken: set[int] = set()
    for rec in targets:
        raw = str(rec.get("target", rec.get("raw", ""))).strip()
        label = _normalize_label(str(rec.get("category", "")),
                                 str(rec.get("subcategory", "")))
        if label is None:
            logger.warning("%s: unusable label for target %r; skipped", where, raw)
            continue
        key = canonical_digits(raw)
        for i, mention in enumerate(sentence.mentions):
            if i in taken or (mention.label is not None and not override):
                continue
            if canonical_digits(mention.raw) == key:
                mention.label = label
                taken.add(i)
                attached += 1
                break
        else:
            logger.warning("%s: target %r matches no mention in %r",
                           where, raw, sentence.id)
    return attached


def _build_sentence(rec: dict, where: str) -> BaseSentence:
    if not isinstance(rec.get("id"), str) or not rec["id"]:
        raise SchemaError("record needs a non-empty string 'id'", where)
    if not isinstance(rec.get("text"), str):
        raise SchemaError(f"record {rec['id']!r} needs a string 'text'", where)
    source = rec.get("source", "other")
    if source not in SOURCES:
        raise SchemaError(f"record {rec['id']!r} has unknown source {source!r}", where)
    sentence = BaseSentence(id=rec["id"], text=rec["text"], source=source,
                            mentions=extract_numerals(rec["text"]))
    labels = rec.get("labels", [])
    if labels:
        if not isinstance(labels, list):
            raise SchemaError(f"record {rec['id']!r}: 'labels' must be a list", where)
        _attach_labels(sentence, labels, where)
    if not sentence.mentions:
        logger.info("record %r contains no parseable numeral", sentence.id)
    return sentence


def load_corpus(path: str, format: str = "jsonl") -> list[BaseSentence]:
    """Load sentences from a JSONL or CSV file, in file order.

    Records without any parseable numeral are retained (mention-less).
    Malformed records and duplicate ids raise SchemaError naming the line.
    """
    sentences: list[BaseSentence] = []
    seen: dict[str, int] = {}

    def add(rec: dict, line_no: int) -> None:
        try:
            sentence = _build_sentence(rec, f"{path}:{line_no}")
        except SchemaError:
            raise
        if sentence.id in seen:
            raise SchemaError(
                f"duplicate id {sentence.id!r} (first seen on line {seen[sentence.id]})",
                path, line_no)
        seen[sentence.id] = line_no
        sentences.append(sentence)

    if format == "jsonl":
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise SchemaError(f"invalid JSON ({exc.msg})", path, line_no)
                if not isinstance(rec, dict):
                    raise SchemaError("record is not a JSON object", path, line_no)
                add(rec, line_no)
    elif format == "csv":
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            for line_no, row in enumerate(reader, start=2):
                rec: dict = {"id": row.get("id"), "text": row.get("text")}
                if row.get("source"):
                    rec["source"] = row["source"]
                if row.get("labels"):
                    try:
                        rec["labels"] = json.loads(row["labels"])
                    except json.JSONDecodeError as exc:
                        raise SchemaError(f"invalid labels JSON ({exc.msg})",
                                          path, line_no)
                add(rec, line_no)
    else:
        raise ValueError(f"unknown corpus format {format!r}")
    return sentences


def serialize_corpus(sentences: list[BaseSentence]) -> str:
    """Canonical JSONL form of a corpus; load_corpus(serialize(c)) == c."""
    lines = []
    for s in sentences:
        rec: dict = {"id": s.id, "text": s.text}
        if s.source != "other":
            rec["source"] = s.source
        labels = [{"target": canonical_digits(m.raw),
                   "category": m.label.category,
                   "subcategory": m.label.subcategory}
                  for m in s.mentions if m.label is not None]
        if labels:
            rec["labels"] = labels
        lines.append(json.dumps(rec, ensure_ascii=False, separators=(",", ":")))
    return "\n".join(lines) + ("\n" if lines else "")


def annotate_labels(sentences: list[BaseSentence], annotator) -> list[BaseSentence]:
    """Fill missing mention labels via an annotator adapter.

    The annotator maps request dicts {id, sentence} to replies
    {id, targets: [{raw, category, subcategory}]} (see docs/wire_protocols.md).
    Mentions the adapter leaves unlabeled default to Quantity with a warning;
    adapter failures flag the sentence and the run continues.
    """
    pending = [s for s in sentences if any(m.label is None for m in s.mentions)]
    replies: dict[str, dict] = {}
    if pending:
        requests = [{"id": s.id, "sentence": s.text} for s in pending]
        try:
            for reply in annotator(requests):
                if isinstance(reply, dict) and isinstance(reply.get("id"), str):
                    replies[reply["id"]] = reply
        except Exception as exc:
            logger.warning("annotator adapter failed (%s); continuing unlabeled", exc)
    for s in pending:
        reply = replies.get(s.id)
        if reply is None:
            logger.warning("no annotator reply for %r; flagged unlabeled", s.id)
        else:
            targets = reply.get("targets", [])
            if isinstance(targets, list):
                _attach_labels(s, targets, f"annotator:{s.id}")
        for mention in s.mentions:
            if mention.label is None:
                mention.label = DEFAULT_LABEL
                logger.warning("mention %r in %r unlabeled; defaulting to Quantity",
                               mention.raw, s.id)
    return sentences


__all__ = ["BaseSentence", "DEFAULT_LABEL", "SOURCES", "annotate_labels",
           "load_corpus", "serialize_corpus"]
