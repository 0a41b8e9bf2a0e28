"""Builtin similarity scorers and the external-scorer batch client.

Embeddings are inputs here, never computed: greedy_match_score aggregates a
caller-supplied similarity matrix, and whole-sentence scoring is either a
cheap lexical baseline or delegated to an adapter process speaking the
scorer wire protocol (docs/wire_protocols.md).
"""

from __future__ import annotations

import hashlib
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence

from .errors import NumprobeError
from .numerals import extract_numerals

EPSILON = 1e-9


# ---------------------------------------------------------------------------
# pure scorers

def greedy_match_score(sim: Sequence[Sequence[float]],
                       weights: Optional[Sequence[float]] = None) -> float:
    """Weighted mean of per-candidate-token maximum similarities.

    sim is an m x n matrix of cosine similarities (candidate tokens by
    reference tokens); weights default to uniform. Raises on an empty matrix
    or a non-positive weight sum.
    """
    m = len(sim)
    if m == 0 or len(sim[0]) == 0:
        raise NumprobeError("similarity matrix must be non-empty")
    if weights is None:
        weights = [1.0] * m
    if len(weights) != m:
        raise NumprobeError(f"expected {m} weights, got {len(weights)}")
    if any(w < 0 for w in weights):
        raise NumprobeError("weights must be non-negative")
    total = float(sum(weights))
    if total <= 0:
        raise NumprobeError("weight sum must be strictly positive")
    return sum(w * max(row) for w, row in zip(weights, sim)) / total


def lexical_overlap_score(a: Sequence[str], b: Sequence[str]) -> float:
    """Unigram F1 over token multisets."""
    if not a or not b:
        raise NumprobeError("token sequences must be non-empty")
    common = sum((Counter(a) & Counter(b)).values())
    if common == 0:
        return 0.0
    precision = common / len(a)
    recall = common / len(b)
    return 2 * precision * recall / (precision + recall)


def simple_tokenize(text: str) -> list[str]:
    """Lowercased words, numerals kept whole, punctuation as single tokens."""
    return re.findall(r"[a-z]+|\d+(?:[.,]\d+)*|[^\sa-z\d]", text.lower())


def fragment_tokenize(text: str) -> list[str]:
    """Subword-style tokenization that splits numerals at punctuation, the
    way wordpiece vocabularies fragment them ("3.56" -> "3", ".", "56")."""
    return re.findall(r"[a-z]+|\d+|[^\sa-z\d]", text.lower())


def numeric_aware_score(candidate: str, reference: str) -> float:
    """Lexical overlap on non-numeral tokens times a numeric agreement factor.

    The factor is prod(exp(-|va - vb| / (|va| + eps))) over numerals aligned
    by position; a hybrid baseline, not a tuned metric.
    """
    cand_mentions = extract_numerals(candidate)
    ref_mentions = extract_numerals(reference)

    def strip_numerals(text: str, mentions) -> list[str]:
        out = []
        last = 0
        for m in mentions:
            out.append(text[last:m.start])
            last = m.end
        out.append(text[last:])
        return simple_tokenize(" ".join(out))

    cand_tokens = strip_numerals(candidate, cand_mentions)
    ref_tokens = strip_numerals(reference, ref_mentions)
    if cand_tokens and ref_tokens:
        base = lexical_overlap_score(cand_tokens, ref_tokens)
    else:
        base = 1.0 if not cand_tokens and not ref_tokens else 0.0
    factor = 1.0
    for ma, mb in zip(cand_mentions, ref_mentions):
        va, vb = float(ma.value), float(mb.value)
        factor *= math.exp(-abs(va - vb) / (abs(va) + EPSILON))
    return base * factor


# ---------------------------------------------------------------------------
# batch scoring interface

@dataclass(frozen=True)
class ScoreRequest:
    id: str
    candidate: str
    reference: str
    meta: dict = field(default_factory=dict)


class Scorer(Protocol):
    def score_batch(self, requests: list[ScoreRequest]) -> dict[str, Optional[float]]:
        """Scores keyed by request id; None marks a per-pair failure."""


class FunctionScorer:
    """Wraps a pure (candidate, reference) -> float function."""

    def __init__(self, fn: Callable[[str, str], float], name: str = "function"):
        self.fn = fn
        self.name = name

    def score_batch(self, requests):
        out: dict[str, Optional[float]] = {}
        for req in requests:
            try:
                out[req.id] = float(self.fn(req.candidate, req.reference))
            except Exception:
                out[req.id] = None
        return out


class OracleScorer:
    """score = -d_nu (or +d_nu when inverted): the protocols' sanity anchor."""

    def __init__(self, invert: bool = False):
        self.invert = invert
        self.name = "anti_oracle" if invert else "oracle"

    def score_batch(self, requests):
        sign = 1.0 if self.invert else -1.0
        out = {}
        for req in requests:
            distance = req.meta.get("distance")
            out[req.id] = sign * distance if distance is not None else None
        return out


class RandomScorer:
    """Deterministic per-pair uniform scores derived from (seed, texts)."""

    def __init__(self, seed: int):
        self.seed = seed
        self.name = "random"

    def score_batch(self, requests):
        out = {}
        for req in requests:
            digest = hashlib.blake2b(
                f"{self.seed}|{req.candidate}|{req.reference}".encode(),
                digest_size=8).digest()
            out[req.id] = int.from_bytes(digest, "big") / 2 ** 64
        return out


class ConstantScorer:
    def __init__(self, value: float = 0.5):
        self.value = value
        self.name = "constant"

    def score_batch(self, requests):
        return {req.id: self.value for req in requests}


def external_score_batch(pairs: list[tuple[str, str]], adapter,
                         chunk_size: int = 256) -> list[Optional[float]]:
    """Score (candidate, reference) pairs through an adapter callable.

    The adapter maps request dicts {id, candidate, reference} to replies
    {id, score}. Chunking never changes results; a failed chunk is retried
    once, and pairs still missing afterwards come back as None for the
    protocols' exclusion logic.
    """
    results: list[Optional[float]] = [None] * len(pairs)
    for lo in range(0, len(pairs), chunk_size):
        chunk = pairs[lo:lo + chunk_size]
        requests = [{"id": str(lo + i), "candidate": c, "reference": r}
                    for i, (c, r) in enumerate(chunk)]
        for attempt in (0, 1):
            try:
                replies = adapter(requests)
            except Exception:
                if attempt == 1:
                    replies = []
                continue
            break
        for reply in replies:
            if not isinstance(reply, dict):
                continue
            rid = reply.get("id")
            score = reply.get("score")
            if isinstance(rid, str) and rid.isdigit() and isinstance(score, (int, float)):
                idx = int(rid)
                if lo <= idx < lo + len(chunk):
                    results[idx] = float(score)
    return results


class ExternalScorer:
    """Scorer backed by a wire-protocol adapter callable."""

    def __init__(self, adapter, chunk_size: int = 256, name: str = "external"):
        self.adapter = adapter
        self.chunk_size = chunk_size
        self.name = name

    def score_batch(self, requests):
        pairs = [(req.candidate, req.reference) for req in requests]
        scores = external_score_batch(pairs, self.adapter, self.chunk_size)
        return {req.id: score for req, score in zip(requests, scores)}


BUILTIN_SCORERS = {
    "oracle": lambda: OracleScorer(),
    "anti_oracle": lambda: OracleScorer(invert=True),
    "constant": lambda: ConstantScorer(),
    "lexical_overlap": lambda: FunctionScorer(
        lambda c, r: lexical_overlap_score(simple_tokenize(c), simple_tokenize(r)),
        name="lexical_overlap"),
    "numeric_aware": lambda: FunctionScorer(numeric_aware_score, name="numeric_aware"),
}


def builtin_scorer(name: str, seed: int = 0) -> Scorer:
    if name == "random":
        return RandomScorer(seed)
    if name in BUILTIN_SCORERS:
        return BUILTIN_SCORERS[name]()
    raise NumprobeError(f"unknown builtin scorer {name!r}; "
                        f"available: random, {', '.join(sorted(BUILTIN_SCORERS))}")


__all__ = ["BUILTIN_SCORERS", "ConstantScorer", "EPSILON", "ExternalScorer",
           "FunctionScorer", "OracleScorer", "RandomScorer", "ScoreRequest",
           "Scorer", "builtin_scorer", "external_score_batch",
           "fragment_tokenize", "greedy_match_score", "lexical_overlap_score",
           "numeric_aware_score", "simple_tokenize"]
