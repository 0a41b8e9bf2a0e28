"""Numerical distance, the three ranking protocols, and their aggregates.

All three protocols share one scoring pass: requests are batched through a
scorer (builtin or external adapter), results are keyed by request id, and
the protocol arithmetic itself is pure, so aggregation is order-independent.
Score ties count as failures; units a protocol cannot evaluate are excluded
and tallied, never silently dropped.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional, Sequence

from .augment import EvaluationUnit
from .errors import NumprobeError
from .metrics import ScoreRequest, Scorer
from .numerals import mention_at, normalized_value

logger = logging.getLogger(__name__)

MODE_SURFACE = "surface"
MODE_UNIT_NORMALIZED = "unit_normalized"


def numerical_distance(base_value: Decimal, variant_value: Decimal,
                       base_style=None, variant_style=None,
                       mode: str = MODE_SURFACE) -> Decimal:
    """|nu(t) - nu(t~)| over surface values; under the unit-normalized mode
    each value is scaled by its own style (a rewritten scale word or duration
    unit changes the variant's normalization, not the base's)."""
    if mode == MODE_UNIT_NORMALIZED:
        base = normalized_value(base_value, base_style) if base_style else base_value
        var = (normalized_value(variant_value, variant_style)
               if variant_style else variant_value)
        return abs(base - var)
    return abs(base_value - variant_value)


def fill_distances(units: list[EvaluationUnit], mode: str = MODE_SURFACE) -> None:
    for unit in units:
        mention = unit.mention
        for variant in unit.variants:
            variant_style = None
            if mode == MODE_UNIT_NORMALIZED:
                found = mention_at(variant.text, mention.start)
                variant_style = found.style if found else mention.style
            variant.distance = numerical_distance(
                mention.value, variant.value, mention.style, variant_style, mode)


@dataclass(frozen=True)
class CrossPair:
    left: tuple[str, int]    # (unit_id, variant_index)
    right: tuple[str, int]
    gold: str                # 'left_closer' | 'right_closer'


@dataclass(frozen=True)
class GoldRanking:
    unit_id: str
    ranks: list[int]


def gold_ranking(unit: EvaluationUnit) -> GoldRanking:
    """Competition ranks (1-based, ties share the smaller rank), ascending
    in numerical distance."""
    distances = [v.distance for v in unit.variants]
    order = sorted(range(len(distances)), key=lambda i: distances[i])
    ranks = [0] * len(distances)
    for pos, idx in enumerate(order):
        if pos and distances[idx] == distances[order[pos - 1]]:
            ranks[idx] = ranks[order[pos - 1]]
        else:
            ranks[idx] = pos + 1
    return GoldRanking(unit_id=unit.unit_id, ranks=ranks)


# ---------------------------------------------------------------------------
# Kendall's tau-b

UNDEFINED = None  # marker for tau over a fully tied side


def _merge_count_inversions(seq: list[int]) -> int:
    """Strict inversions (seq[i] > seq[j] for i < j) via mergesort."""
    if len(seq) <= 1:
        return 0
    mid = len(seq) // 2
    left, right = seq[:mid], seq[mid:]
    inv = _merge_count_inversions(left) + _merge_count_inversions(right)
    merged = []
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            inv += len(left) - i
            merged.append(right[j])
            j += 1
    seq[:] = merged + left[i:] + right[j:]
    return inv


def _tie_pairs(values: Sequence) -> int:
    counts: dict = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    return sum(c * (c - 1) // 2 for c in counts.values())


def kendall_tau_b(pred_scores: Sequence[float], gold_distances: Sequence) -> Optional[float]:
    """tau_b between predicted scores and the gold ascending-distance order.

    A pair is concordant when the lower-distance item has the strictly
    higher score, discordant when strictly lower; ties are corrected per
    side: (C - D) / sqrt((C + D + T_pred)(C + D + T_gold)). Returns None
    when either side is fully tied.
    """
    if len(pred_scores) != len(gold_distances):
        raise NumprobeError("pred_scores and gold_distances differ in length")
    n = len(pred_scores)
    if n < 2:
        raise NumprobeError("tau_b needs at least two items")
    # concordance here is anti-monotone in distance: negate distances and
    # count standard concordance
    pairs = sorted(zip([_neg(d) for d in gold_distances], pred_scores))
    n0 = n * (n - 1) // 2
    gold_ties = _tie_pairs([p[0] for p in pairs])
    joint_ties = _tie_pairs(pairs)
    pred_ties = _tie_pairs(pred_scores)
    # after sorting by (gold asc, score asc), discordant = strict inversions
    # in the score sequence
    discordant = _merge_count_inversions([p[1] for p in pairs])
    concordant = n0 - discordant - pred_ties - gold_ties + joint_ties
    den_pred = concordant + discordant + (pred_ties - joint_ties)
    den_gold = concordant + discordant + (gold_ties - joint_ties)
    if den_pred == 0 or den_gold == 0:
        return UNDEFINED
    return (concordant - discordant) / math.sqrt(den_pred * den_gold)


def _neg(d):
    return -d


# ---------------------------------------------------------------------------
# scoring plumbing

def _score_units(units: list[EvaluationUnit], scorer: Scorer,
                 indices_per_unit) -> dict[str, Optional[float]]:
    requests = []
    for unit in units:
        base_text = unit.base.text
        for idx in indices_per_unit(unit):
            variant = unit.variants[idx]
            requests.append(ScoreRequest(
                id=f"{unit.unit_id}#{idx}",
                candidate=variant.text,
                reference=base_text,
                meta={"distance": float(variant.distance)},
            ))
    return scorer.score_batch(requests)


@dataclass
class ProtocolResult:
    name: str
    value: Optional[float]        # accuracy or mean tau_b
    evaluated: int
    excluded: dict[str, int] = field(default_factory=dict)
    by_stratum: dict[str, "ProtocolResult"] = field(default_factory=dict)


class _Tally:
    def __init__(self):
        self.passes = 0.0
        self.total = 0
        self.excluded: dict[str, int] = {}

    def exclude(self, reason: str) -> None:
        self.excluded[reason] = self.excluded.get(reason, 0) + 1

    def add(self, passed: float) -> None:
        self.passes += passed
        self.total += 1

    def result(self, name: str) -> ProtocolResult:
        value = self.passes / self.total if self.total else None
        return ProtocolResult(name=name, value=value, evaluated=self.total,
                              excluded=dict(sorted(self.excluded.items())))


def _strata(unit: EvaluationUnit) -> list[str]:
    return [unit.spec.family, f"{unit.spec.family}/{unit.category}"]


def _aggregate(name: str, outcomes) -> ProtocolResult:
    """outcomes: iterable of (unit, pass_value | None, exclusion_reason | None)."""
    overall = _Tally()
    per: dict[str, _Tally] = {}
    for unit, value, reason in outcomes:
        tallies = [overall] + [per.setdefault(s, _Tally()) for s in _strata(unit)]
        for tally in tallies:
            if reason is not None:
                tally.exclude(reason)
            else:
                tally.add(value)
    result = overall.result(name)
    result.by_stratum = {k: per[k].result(name) for k in sorted(per)}
    return result


# ---------------------------------------------------------------------------
# triplet

def triplet_select(unit: EvaluationUnit) -> Optional[tuple[int, int, bool]]:
    """(closest index, farthest index, tie_broken) or None when the unit is
    ineligible (fewer than two variants, or all distances equal)."""
    if len(unit.variants) < 2:
        return None
    distances = [v.distance for v in unit.variants]
    if len(set(distances)) == 1:
        return None
    lo = min(range(len(distances)), key=lambda i: (distances[i], i))
    hi = max(range(len(distances)), key=lambda i: (distances[i], -i))
    tie_broken = distances.count(distances[lo]) > 1 or distances.count(distances[hi]) > 1
    return lo, hi, tie_broken


def triplet_accuracy(units: list[EvaluationUnit], scorer: Scorer) -> ProtocolResult:
    """Fraction of units whose closest variant strictly outscores the
    farthest; score ties fail, scorer failures are excluded and tallied."""
    selected: dict[str, tuple[int, int]] = {}
    eligible = []
    outcomes = []
    for unit in units:
        pick = triplet_select(unit)
        if pick is None:
            reason = ("too_few_variants" if len(unit.variants) < 2
                      else "all_distances_tied")
            outcomes.append((unit, None, reason))
        else:
            selected[unit.unit_id] = (pick[0], pick[1])
            eligible.append(unit)
    scores = _score_units(eligible, scorer,
                          lambda u: selected[u.unit_id])
    for unit in eligible:
        lo, hi = selected[unit.unit_id]
        s_lo = scores.get(f"{unit.unit_id}#{lo}")
        s_hi = scores.get(f"{unit.unit_id}#{hi}")
        if s_lo is None or s_hi is None:
            outcomes.append((unit, None, "scorer_error"))
        else:
            outcomes.append((unit, 1.0 if s_lo > s_hi else 0.0, None))
    return _aggregate("triplet", outcomes)


# ---------------------------------------------------------------------------
# listwise

def listwise_eval(units: list[EvaluationUnit], scorer: Scorer) -> ProtocolResult:
    """Per-unit tau_b between scorer similarities and gold distances,
    averaged over units where tau_b is defined."""
    eligible = [u for u in units if len(u.variants) >= 2]
    scores = _score_units(eligible, scorer, lambda u: range(len(u.variants)))
    outcomes = []
    for unit in units:
        if len(unit.variants) < 2:
            outcomes.append((unit, None, "too_few_variants"))
            continue
        sims = [scores.get(f"{unit.unit_id}#{i}") for i in range(len(unit.variants))]
        if any(s is None for s in sims):
            outcomes.append((unit, None, "scorer_error"))
            continue
        tau = kendall_tau_b(sims, [v.distance for v in unit.variants])
        if tau is UNDEFINED:
            outcomes.append((unit, None, "tau_undefined"))
        else:
            outcomes.append((unit, tau, None))
    result = _aggregate("listwise", outcomes)
    return result


def listwise_concordant_fraction(units: list[EvaluationUnit], scorer: Scorer) -> Optional[float]:
    """Mean per-unit fraction of strictly concordant (score, distance) pairs;
    the pairwise-difficulty companion figure to triplet accuracy."""
    eligible = [u for u in units if len(u.variants) >= 2]
    scores = _score_units(eligible, scorer, lambda u: range(len(u.variants)))
    fractions = []
    for unit in eligible:
        sims = [scores.get(f"{unit.unit_id}#{i}") for i in range(len(unit.variants))]
        if any(s is None for s in sims):
            continue
        distances = [v.distance for v in unit.variants]
        concordant = total = 0
        for i in range(len(sims)):
            for j in range(i + 1, len(sims)):
                if distances[i] == distances[j]:
                    continue
                total += 1
                closer, farther = (i, j) if distances[i] < distances[j] else (j, i)
                if sims[closer] > sims[farther]:
                    concordant += 1
        if total:
            fractions.append(concordant / total)
    return sum(fractions) / len(fractions) if fractions else None


# ---------------------------------------------------------------------------
# cross-pair

def cross_pair_sample(units: list[EvaluationUnit], n: int, seed: int,
                      max_retries: int = 100) -> list[CrossPair]:
    """n pairs of (unit, variant) draws from matching categories with
    distinct unit ids; equal-distance draws are resampled."""
    rng = random.Random(seed)
    by_category: dict[str, list[EvaluationUnit]] = {}
    for unit in units:
        if unit.variants:
            by_category.setdefault(unit.category, []).append(unit)
    eligible = [u for cat, members in sorted(by_category.items())
                for u in members if len(members) >= 2]
    if not eligible:
        raise NumprobeError("cross-pair sampling needs a category with >= 2 units")
    pairs: list[CrossPair] = []
    while len(pairs) < n:
        for _ in range(max_retries):
            first = rng.choice(eligible)
            partner = rng.choice([u for u in by_category[first.category]
                                  if u.unit_id != first.unit_id])
            i = rng.randrange(len(first.variants))
            j = rng.randrange(len(partner.variants))
            d_left = first.variants[i].distance
            d_right = partner.variants[j].distance
            if d_left == d_right:
                continue
            gold = "left_closer" if d_left < d_right else "right_closer"
            pairs.append(CrossPair(left=(first.unit_id, i),
                                   right=(partner.unit_id, j), gold=gold))
            break
        else:
            raise NumprobeError("cross-pair resampling exhausted: every draw "
                                "has equal distances")
    return pairs


def cross_pair_accuracy(pairs: list[CrossPair], units: list[EvaluationUnit],
                        scorer: Scorer) -> ProtocolResult:
    """Fraction of pairs where the gold-closer side strictly wins; ties fail."""
    by_id = {u.unit_id: u for u in units}
    request_keys = sorted({key for p in pairs for key in (p.left, p.right)})
    requests = []
    for unit_id, idx in request_keys:
        unit = by_id[unit_id]
        requests.append(ScoreRequest(
            id=f"{unit_id}#{idx}",
            candidate=unit.variants[idx].text,
            reference=unit.base.text,
            meta={"distance": float(unit.variants[idx].distance)},
        ))
    scores = scorer.score_batch(requests)
    overall = _Tally()
    per: dict[str, _Tally] = {}
    for pair in pairs:
        unit = by_id[pair.left[0]]
        strata = [unit.spec.family, f"{unit.spec.family}/{unit.category}"]
        tallies = [overall] + [per.setdefault(s, _Tally()) for s in strata]
        s_left = scores.get(f"{pair.left[0]}#{pair.left[1]}")
        s_right = scores.get(f"{pair.right[0]}#{pair.right[1]}")
        if s_left is None or s_right is None:
            for t in tallies:
                t.exclude("scorer_error")
            continue
        closer, farther = ((s_left, s_right) if pair.gold == "left_closer"
                           else (s_right, s_left))
        for t in tallies:
            t.add(1.0 if closer > farther else 0.0)
    result = overall.result("cross_pair")
    result.by_stratum = {k: per[k].result("cross_pair") for k in sorted(per)}
    return result


__all__ = ["CrossPair", "GoldRanking", "MODE_SURFACE", "MODE_UNIT_NORMALIZED",
           "ProtocolResult", "UNDEFINED", "cross_pair_accuracy",
           "cross_pair_sample", "fill_distances", "gold_ranking",
           "kendall_tau_b", "listwise_concordant_fraction", "listwise_eval",
           "numerical_distance", "triplet_accuracy", "triplet_select"]
