"""Evaluation-unit generation: seeded random and rule-based perturbations.

Every unit's RNG stream is derived from (seed, unit_id), so the unit list is
byte-identical for a given (corpus, seed) regardless of worker count or
generation order.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import logging
import random
from dataclasses import dataclass, field, replace
from decimal import Decimal
from typing import Optional

from .corpus import BaseSentence
from .errors import NumprobeError
from .numerals import (DURATION_UNITS, KIND_CARDINAL, KIND_DATE, KIND_DURATION,
                       KIND_MONETARY, KIND_PERCENTAGE, KIND_TIME,
                       REFERENCE_YEAR, DigitStyle, DurationStyle,
                       NumeralMention, date_from_day_index, min_decimals,
                       render_number, replace_mention)

logger = logging.getLogger(__name__)

FAMILY_RANDOM = "random"
FAMILY_RULE = "rule_based"

# canonical rule order; RULE_K carries each rule's variant count
RULES = ["DateShift", "DurationConvert", "ExtraDecimal", "FractionalShift",
         "ScaleChange", "MillionToBillion", "LastDigitEdit"]
RULE_K = {"DateShift": 9, "DurationConvert": 9, "ExtraDecimal": 9,
          "FractionalShift": 9, "ScaleChange": 9, "MillionToBillion": 1,
          "LastDigitEdit": 2}
RANDOM_K = 9

MAX_RESAMPLE = 100

SCALE_REWRITE = {"million": "billion", "Million": "Billion",
                 "MILLION": "BILLION", "M": "B"}

# deterministic exponent inventory for ScaleChange; +1 keeps the published
# "1,000 -> 10,000" example always reachable
SCALE_CHANGE_EXPONENTS = [-3, -2, -1, 1, 2, 3, 4, 5, 6]

_NEXT_SMALLER = {"year": ("month", 12), "month": ("week", 4),
                 "week": ("day", 7), "day": ("hour", 24), "hour": ("minute", 60)}


@dataclass(frozen=True)
class AugmentationSpec:
    family: str
    rule: Optional[str] = None

    @property
    def k(self) -> int:
        return RANDOM_K if self.family == FAMILY_RANDOM else RULE_K[self.rule]


@dataclass
class Variant:
    text: str
    value: Decimal
    distance: Optional[Decimal] = None   # filled by the protocol stage
    validity: Optional[float] = None     # filled by the validation stage


@dataclass
class EvaluationUnit:
    unit_id: str
    base: BaseSentence
    target: int                          # mention index in base.mentions
    spec: AugmentationSpec
    variants: list[Variant] = field(default_factory=list)

    @property
    def mention(self) -> NumeralMention:
        return self.base.mentions[self.target]

    @property
    def category(self) -> str:
        label = self.mention.label
        return label.category if label else "Unlabeled"


def derive_rng(seed: int, unit_id: str) -> random.Random:
    digest = hashlib.blake2b(f"{seed}:{unit_id}".encode(), digest_size=8).digest()
    return random.Random(int.from_bytes(digest, "big"))


def _is_integer(value: Decimal) -> bool:
    return value == value.to_integral_value()


def _is_bare_year(mention: NumeralMention) -> bool:
    return (mention.kind == KIND_CARDINAL and _is_integer(mention.value)
            and Decimal(1000) <= mention.value <= Decimal(2999)
            and isinstance(mention.style, DigitStyle)
            and mention.style.scale_token is None
            and not mention.style.percent)


def _temporal(mention: NumeralMention) -> bool:
    label = mention.label
    return label is not None and (
        label.category == "Temporal"
        or (label.category == "Option" and label.subcategory == "maturity_date"))


def rule_applicable(mention: NumeralMention, rule: str) -> bool:
    style = mention.style
    if rule == "DateShift":
        return mention.kind == KIND_DATE or (_temporal(mention) and _is_bare_year(mention))
    if rule == "DurationConvert":
        return mention.kind == KIND_DURATION
    if rule == "ExtraDecimal":
        return (mention.kind in (KIND_CARDINAL, KIND_PERCENTAGE, KIND_MONETARY)
                and mention.decimals() <= 2)
    if rule == "FractionalShift":
        return (mention.kind in (KIND_CARDINAL, KIND_PERCENTAGE, KIND_MONETARY)
                and Decimal(0) < mention.value < Decimal(1))
    if rule == "ScaleChange":
        return (mention.kind in (KIND_CARDINAL, KIND_MONETARY)
                and _is_integer(mention.value) and mention.value != 0)
    if rule == "MillionToBillion":
        return (isinstance(style, DigitStyle) and style.scale_token is not None
                and style.scale_token.lower() in ("million", "m")
                and style.scale_token != "m")
    if rule == "LastDigitEdit":
        return (mention.kind in (KIND_CARDINAL, KIND_MONETARY)
                and _is_integer(mention.value)
                and len(str(abs(int(mention.value)))) >= 2)
    raise ValueError(f"unknown rule {rule!r}")


# ---------------------------------------------------------------------------
# rule transforms

def apply_rule(text: str, mention: NumeralMention, rule: str,
               rng: random.Random) -> list[Variant]:
    """Generate the rule's variants for one mention inside text."""
    if not rule_applicable(mention, rule):
        raise NumprobeError(f"rule {rule} not applicable to {mention.raw!r}")
    pairs = _RULE_FNS[rule](mention, rng)
    return [Variant(text=replace_mention(text, mention, raw), value=value)
            for raw, value in pairs]


def _rule_date_shift(mention: NumeralMention, rng: random.Random):
    if mention.kind != KIND_DATE:  # bare year: shift the printed year
        offsets = rng.sample([o for o in range(-9, 10) if o != 0], RULE_K["DateShift"])
        out = []
        for off in offsets:
            value = mention.value + off
            out.append((render_number(value, mention.style), value))
        return out
    style = mention.style
    date = date_from_day_index(mention.value)
    if style.year_width:
        offsets = rng.sample([o for o in range(-9, 10) if o != 0], RULE_K["DateShift"])
        pairs = []
        for off in offsets:
            try:
                shifted = date.replace(year=date.year + off)
            except ValueError:  # Feb 29 in a non-leap target year
                shifted = date.replace(year=date.year + off, day=28)
            value = Decimal((shifted - dt.date(1970, 1, 1)).days)
            pairs.append((render_number(value, style), value))
        return pairs
    # no printed year: whole-day offsets staying inside the reference year
    lo = dt.date(REFERENCE_YEAR, 1, 1) - date
    hi = dt.date(REFERENCE_YEAR, 12, 31) - date
    candidates = [o for o in range(max(lo.days, -30), min(hi.days, 30) + 1) if o != 0]
    offsets = rng.sample(candidates, min(RULE_K["DateShift"], len(candidates)))
    pairs = []
    for off in offsets:
        value = mention.value + off
        pairs.append((render_number(value, style), value))
    return pairs


def _duration_candidates(value: Decimal, unit: str) -> list[tuple[Decimal, str]]:
    """Deterministic rewrite ladder: exact conversions, adjacent-unit
    rewrites, representable up-conversions, then integer multiples."""
    idx = DURATION_UNITS.index(unit)
    downs: list[tuple[Decimal, str]] = []
    v, u = value, unit
    while u in _NEXT_SMALLER:
        smaller, factor = _NEXT_SMALLER[u]
        v = v * factor
        downs.append((v, smaller))
        u = smaller
    ups: list[tuple[Decimal, str]] = []
    v, u = value, unit
    inverse = {small: (big, factor) for big, (small, factor) in _NEXT_SMALLER.items()}
    while u in inverse:
        bigger, factor = inverse[u]
        v = v / factor
        if min_decimals(v) > 2:
            break
        ups.append((v, bigger))
        u = bigger
    rewrites: list[tuple[Decimal, str]] = []
    for dist in range(1, len(DURATION_UNITS)):
        if idx + dist < len(DURATION_UNITS):
            rewrites.append((value, DURATION_UNITS[idx + dist]))
        if idx - dist >= 0:
            rewrites.append((value, DURATION_UNITS[idx - dist]))

    ordered: list[tuple[Decimal, str]] = []
    for i in range(max(len(downs), len(rewrites) // 2 + 1)):
        if i < len(downs):
            ordered.append(downs[i])
        ordered.extend(rewrites[2 * i:2 * i + 2])
    ordered.extend(ups)
    mult = 2
    while len(ordered) < 16:
        ordered.append((value * mult, unit))
        mult += 1

    seen: set[tuple[Decimal, str]] = {(value, unit)}
    unique = []
    for cand in ordered:
        if cand not in seen and cand[0] > 0:
            seen.add(cand)
            unique.append(cand)
    return unique


def _rule_duration_convert(mention: NumeralMention, rng: random.Random):
    style = mention.style
    pairs = []
    for v, u in _duration_candidates(mention.value, style.unit)[:RULE_K["DurationConvert"]]:
        new_style = DurationStyle(unit=u, decimals=min_decimals(v))
        pairs.append((render_number(v, new_style), v))
    return pairs


def _rule_extra_decimal(mention: NumeralMention, rng: random.Random):
    # digit 0 would be value-preserving, so the nine variants are digits 1..9
    digits = list("123456789")
    rng.shuffle(digits)
    style = mention.style
    pairs = []
    for digit in digits:
        value = Decimal(f"{mention.value}.{digit}") if mention.decimals() == 0 \
            else Decimal(f"{mention.value}{digit}")
        new_style = replace(style, decimals=mention.decimals() + 1)
        pairs.append((render_number(value, new_style), value))
    return pairs


def _rule_fractional_shift(mention: NumeralMention, rng: random.Random):
    decimals = mention.decimals() or 1
    if Decimal(10) ** decimals - 2 < RULE_K["FractionalShift"]:
        decimals += 1  # one-decimal bases have only 8 same-precision candidates
    quantum = Decimal(1).scaleb(-decimals)
    pool = [n * quantum for n in range(1, 10 ** decimals) if n * quantum != mention.value]
    picks = rng.sample(pool, RULE_K["FractionalShift"])
    style = replace(mention.style, decimals=decimals)
    return [(render_number(v, style), v) for v in picks]


def _rule_scale_change(mention: NumeralMention, rng: random.Random):
    exponents = list(SCALE_CHANGE_EXPONENTS)
    rng.shuffle(exponents)
    style = mention.style
    pairs = []
    for exp in exponents:
        decimals = min_decimals(mention.value.scaleb(exp))
        # re-quantize so the value carries plain (non-exponent) notation
        value = mention.value.scaleb(exp).quantize(Decimal(1).scaleb(-decimals))
        new_style = replace(style, decimals=decimals)
        pairs.append((render_number(value, new_style), value))
    return pairs


def _rule_million_to_billion(mention: NumeralMention, rng: random.Random):
    style = mention.style
    value = mention.value / 1000
    new_style = replace(style, decimals=min_decimals(value),
                        scale_token=SCALE_REWRITE[style.scale_token])
    return [(render_number(value, new_style), value)]


def _rule_last_digit_edit(mention: NumeralMention, rng: random.Random):
    style = mention.style
    appended = mention.value * 10
    dropped = Decimal(int(mention.value) // 10)  # toward zero for negatives
    if int(mention.value) < 0:
        dropped = Decimal(-(abs(int(mention.value)) // 10))
    pairs = []
    for value in (appended, dropped):
        pairs.append((render_number(value, replace(style, decimals=0)), value))
    return pairs


_RULE_FNS = {
    "DateShift": _rule_date_shift,
    "DurationConvert": _rule_duration_convert,
    "ExtraDecimal": _rule_extra_decimal,
    "FractionalShift": _rule_fractional_shift,
    "ScaleChange": _rule_scale_change,
    "MillionToBillion": _rule_million_to_billion,
    "LastDigitEdit": _rule_last_digit_edit,
}


# ---------------------------------------------------------------------------
# random augmentation

def _quantize_to(value: Decimal, decimals: int) -> Decimal:
    return value.quantize(Decimal(1).scaleb(-decimals))


def _draw_multiplicative(base: Decimal, spread: Decimal, decimals: int,
                         rng: random.Random) -> Decimal:
    u = Decimal(repr(rng.uniform(-1.0, 1.0)))
    return _quantize_to(base + base.copy_abs() * spread * u, decimals)


def _draw_random_value(mention: NumeralMention, rng: random.Random) -> Optional[Decimal]:
    """One candidate value per the per-category ranges; None = no valid draw."""
    label = mention.label
    base = mention.value
    category, sub = label.category, label.subcategory
    decimals = mention.decimals()

    if category == "Temporal" or (category == "Option" and sub == "maturity_date"):
        if sub == "time":
            if base == 0:
                return Decimal(rng.randint(1, 60))
            if base <= 12:
                return Decimal(rng.randint(1, 12))
            if base < 60:
                return Decimal(rng.randint(1, 60))
            shift = Decimal(repr(rng.uniform(-0.2, 0.2)))
            value = _quantize_to(base * (1 + shift), 0)
            if mention.kind == KIND_TIME and not 0 <= value < 1440:
                return None
            return value
        # date-resolution mentions
        if mention.kind == KIND_DATE:
            offset = rng.randint(-30, 30)
            if offset == 0:
                return None
            value = base + offset
            if mention.style.year_width == 0:
                if date_from_day_index(value).year != REFERENCE_YEAR:
                    return None
            return value
        if mention.kind == KIND_DURATION or _is_bare_year(mention):
            span = 9 if _is_bare_year(mention) else 30
            offset = rng.randint(-span, span)
            value = base + offset
            return value if offset != 0 and value >= 1 else None
        return _positive(_draw_multiplicative(base, Decimal(1), decimals, rng))

    if category in ("Monetary", "Percentage"):
        return _positive(_draw_multiplicative(base, Decimal(1), decimals, rng))
    if category == "Quantity":
        if base <= 5:
            if _is_integer(base):
                bound = int(base * 3)
                if bound < 1:
                    return None
                offset = rng.randint(-bound, bound)
                return _positive(base + offset) if offset else None
            return _positive(_draw_multiplicative(base, Decimal(3), decimals, rng))
        if _is_integer(base):
            offset = rng.randint(-int(base), int(base))
            return _positive(base + offset) if offset else None
        return _positive(_draw_multiplicative(base, Decimal(1), decimals, rng))
    if category in ("ProductNumber", "Indicator") or (
            category == "Option" and sub == "exercise_price"):
        return _positive(_draw_multiplicative(base, Decimal(2), decimals, rng))
    return _positive(_draw_multiplicative(base, Decimal(1), decimals, rng))


def _positive(value: Decimal) -> Optional[Decimal]:
    return value if value > 0 else None


def random_augment(text: str, mention: NumeralMention,
                   rng: random.Random) -> list[Variant]:
    """Nine random variants with distinct values, resampled on collision."""
    values: list[Decimal] = []
    seen = {mention.value}
    tries = 0
    while len(values) < RANDOM_K and tries < MAX_RESAMPLE:
        tries += 1
        value = _draw_random_value(mention, rng)
        if value is None or value in seen:
            continue
        seen.add(value)
        values.append(value)
    if len(values) < RANDOM_K:
        logger.warning("random augmentation of %r exhausted after %d tries; "
                       "emitting %d variants", mention.raw, MAX_RESAMPLE, len(values))
    variants = []
    for value in values:
        style = mention.style
        if isinstance(style, (DigitStyle, DurationStyle)) and \
                min_decimals(value) > mention.decimals():
            style = replace(style, decimals=min_decimals(value))
        raw = render_number(value, style)
        variants.append(Variant(text=replace_mention(text, mention, raw), value=value))
    return variants


# ---------------------------------------------------------------------------
# unit construction

def make_units(corpus: list[BaseSentence], families: set[str], seed: int,
               rules: Optional[list[str]] = None) -> list[EvaluationUnit]:
    """One unit per (sentence, labeled mention, applicable spec).

    Inapplicable (mention, rule) pairs produce no unit; random units whose
    resampling exhausts to zero variants are dropped.
    """
    active_rules = RULES if rules is None else [r for r in RULES if r in rules]
    units: list[EvaluationUnit] = []
    for sentence in corpus:
        for target, mention in enumerate(sentence.mentions):
            if mention.label is None:
                continue
            specs: list[AugmentationSpec] = []
            if FAMILY_RANDOM in families:
                specs.append(AugmentationSpec(FAMILY_RANDOM))
            if FAMILY_RULE in families:
                specs.extend(AugmentationSpec(FAMILY_RULE, rule)
                             for rule in active_rules
                             if rule_applicable(mention, rule))
            for spec in specs:
                suffix = spec.rule if spec.rule else "random"
                unit_id = f"{sentence.id}:m{target}:{suffix}"
                rng = derive_rng(seed, unit_id)
                if spec.family == FAMILY_RANDOM:
                    variants = random_augment(sentence.text, mention, rng)
                else:
                    variants = apply_rule(sentence.text, mention, spec.rule, rng)
                if not variants:
                    logger.warning("unit %s produced no variants; dropped", unit_id)
                    continue
                units.append(EvaluationUnit(unit_id=unit_id, base=sentence,
                                            target=target, spec=spec,
                                            variants=variants))
    return units


__all__ = ["AugmentationSpec", "EvaluationUnit", "FAMILY_RANDOM", "FAMILY_RULE",
           "MAX_RESAMPLE", "RANDOM_K", "RULES", "RULE_K", "Variant",
           "apply_rule", "derive_rng", "make_units", "random_augment",
           "rule_applicable"]
