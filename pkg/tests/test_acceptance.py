"""Acceptance suite: one test per shipping criterion, builtin scorers only.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS line per
criterion. Every tolerance is pinned here; nothing is deferred.
"""

import hashlib
import random
import time
from decimal import Decimal
from pathlib import Path

import pytest

from numprobe import fixture_corpus_path
from numprobe.augment import (RANDOM_K, RULES, RULE_K, apply_rule,
                              derive_rng, random_augment)
from numprobe.cli import main
from numprobe.metrics import OracleScorer, RandomScorer
from numprobe.numerals import FinNumLabel, extract_numerals, parse_value
from numprobe.protocols import (cross_pair_accuracy, cross_pair_sample,
                                kendall_tau_b, listwise_eval,
                                numerical_distance, triplet_accuracy)
from numprobe.validate import filter_units, validate_unit

from test_protocols import tau_oracle
from test_validate import unit_with_scores


def ok(name):
    print(f"\nACCEPTANCE PASS: {name}")


# ---------------------------------------------------------------------------
# criterion 1: oracle / anti-oracle / random-scorer contract, >= 500 units

def test_oracle_contract(synthetic_units):
    start = time.time()
    units = synthetic_units
    assert len(units) >= 500

    oracle = OracleScorer()
    assert triplet_accuracy(units, oracle).value == 1.0
    assert listwise_eval(units, oracle).value == 1.0
    pairs = cross_pair_sample(units, 10_000, seed=2024)
    assert cross_pair_accuracy(pairs, units, oracle).value == 1.0

    anti = OracleScorer(invert=True)
    assert triplet_accuracy(units, anti).value == 0.0
    assert listwise_eval(units, anti).value == -1.0
    assert cross_pair_accuracy(pairs, units, anti).value == 0.0

    coin = RandomScorer(seed=2024)
    accuracy = cross_pair_accuracy(pairs, units, coin).value
    assert accuracy == pytest.approx(0.5, abs=0.02)

    elapsed = time.time() - start
    assert elapsed < 60
    ok(f"oracle/anti-oracle contract over {len(units)} units "
       f"(random cross-pair {accuracy:.4f}, {elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# criterion 2: tau_b equals exhaustive pair counting on 10,000 seeded lists

def test_tau_b_oracle_equivalence():
    start = time.time()
    rng = random.Random(73)
    cases = 0
    for _ in range(10_000):
        n = rng.randint(2, 8)
        scores = [rng.choice([0.0, 0.2, 0.4, 0.6, 0.8, 1.0]) for _ in range(n)]
        distances = [rng.randint(0, 5) for _ in range(n)]
        assert kendall_tau_b(scores, distances) == tau_oracle(scores, distances)
        cases += 1
    elapsed = time.time() - start
    assert cases == 10_000 and elapsed < 30
    ok(f"tau_b matches exhaustive counting on 10,000 lists ({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# criterion 3: the seven rule transforms reproduce their published examples

def _mention(text, category="Quantity", subcategory="quantity", index=0):
    mention = extract_numerals(text)[index]
    mention.label = FinNumLabel(category, subcategory)
    return mention


def test_rule_table_fidelity():
    checks = []

    # Date Shift: "Sep. 28, 2025" -> "Sep. 28, 2029" (seed frozen by scan)
    text = "Results land on Sep. 28, 2025 as planned."
    m = _mention(text, "Temporal", "date")
    variants = apply_rule(text, m, "DateShift", derive_rng(4, "u"))
    assert any("Sep. 28, 2029" in v.text for v in variants)
    checks.append('DateShift "Sep. 28, 2025"->"Sep. 28, 2029"')

    # Duration Convert: "1 week" -> "7 days" and "1 month"
    text = "Downtime of 1 week is expected."
    m = _mention(text, "Temporal", "date")
    variants = apply_rule(text, m, "DurationConvert", derive_rng(0, "u"))
    raws = {v.text[m.start:].split(" is expected.")[0] for v in variants}
    assert {"7 days", "1 month"} <= raws
    checks.append('DurationConvert "1 week"->"7 days"')

    # Extra Decimal: "3.5" -> "3.56" always reachable (digits 1..9)
    text = "Up 3.5 points."
    m = _mention(text)
    variants = apply_rule(text, m, "ExtraDecimal", derive_rng(0, "u"))
    assert any("3.56" in v.text for v in variants)
    assert all(str(v.value)[:3] == "3.5" and len(str(v.value)) == 4
               for v in variants)
    checks.append('ExtraDecimal "3.5"->"3.56"')

    # Fractional Shift: "0.25" -> nine distinct values in (0,1)
    text = "Ratio of 0.25 held."
    m = _mention(text)
    variants = apply_rule(text, m, "FractionalShift", derive_rng(0, "u"))
    values = {v.value for v in variants}
    assert len(values) == 9
    assert all(Decimal(0) < v < Decimal(1) and v != Decimal("0.25")
               for v in values)
    checks.append('FractionalShift "0.25"->(0,1)')

    # Scale Change: "1,000" -> "10,000" always reachable (exponent +1)
    text = "Sold 1,000 units."
    m = _mention(text)
    variants = apply_rule(text, m, "ScaleChange", derive_rng(0, "u"))
    assert any("10,000" in v.text for v in variants)
    checks.append('ScaleChange "1,000"->"10,000"')

    # Million to Billion: "110 million" -> exactly "0.11 billion"
    text = "Spent 110 million total."
    m = _mention(text, "Monetary", "money")
    variants = apply_rule(text, m, "MillionToBillion", derive_rng(0, "u"))
    assert len(variants) == 1 and "0.11 billion" in variants[0].text
    checks.append('MillionToBillion "110 million"->"0.11 billion"')

    # Last Digit Edit: "110" -> {"1100", "11"}
    text = "Printed 110 on the tape."
    m = _mention(text, "Indicator", "indicator")
    variants = apply_rule(text, m, "LastDigitEdit", derive_rng(0, "u"))
    raws = {v.text.split()[1] for v in variants}
    assert raws == {"1100", "11"}
    checks.append('LastDigitEdit "110"->{"1100","11"}')

    # per-rule variant counts in canonical rule order
    assert [RULE_K[r] for r in RULES] == [9, 9, 9, 9, 9, 1, 2]
    checks.append("k counts {9,9,9,9,9,1,2}")

    ok("rule-transform fidelity: " + "; ".join(checks))


# ---------------------------------------------------------------------------
# criterion 4: random-augmentation range conformance, 10,000 variants per
# category

RANGE_CASES = [
    ("Monetary/quote", "Traded at 80 on the day.", "Monetary", "quote",
     lambda v: Decimal(0) < v <= Decimal(160)),
    ("Percentage/relative", "Shares rose 50% fast.", "Percentage", "relative",
     lambda v: Decimal(0) < v <= Decimal(100)),
    ("Quantity<=5", "We bought 3 units.", "Quantity", "quantity",
     lambda v: max(Decimal(0), Decimal(3 - 9)) <= v <= Decimal(3 + 9)
     and v > 0),
    ("Quantity>5", "We bought 40 units.", "Quantity", "quantity",
     lambda v: Decimal(0) < v <= Decimal(80) and v == v.to_integral_value()),
    ("ProductNumber", "Model 8 launched.", "ProductNumber", "product_number",
     lambda v: Decimal(0) < v <= Decimal(24)),
    ("Indicator", "RSI hit 70 today.", "Indicator", "indicator",
     lambda v: Decimal(0) < v <= Decimal(210)),
    ("Option/exercise_price", "Strike at 150 looks rich.", "Option",
     "exercise_price", lambda v: Decimal(0) < v <= Decimal(450)),
    ("Temporal/time base 0", "Logged at 0:00 exactly.", "Temporal", "time",
     lambda v: Decimal(1) <= v <= Decimal(60)),
    ("Temporal/time base<=12", "Logged at 0:07 exactly.", "Temporal", "time",
     lambda v: Decimal(1) <= v <= Decimal(12)),
    ("Temporal/time base<60", "Logged at 0:45 exactly.", "Temporal", "time",
     lambda v: Decimal(1) <= v <= Decimal(60)),
    ("Temporal/time base>=60", "Alert at 9:04 AM today.", "Temporal", "time",
     lambda v: abs(v - 544) <= Decimal("544") * Decimal("0.2") + Decimal("0.5")),
    ("Temporal/date", "Due on Sep. 28, 2025 sharp.", "Temporal", "date",
     lambda v: 1 <= abs(v - parse_value("Sep. 28, 2025")) <= 30),
    ("Option/maturity_date", "Expires Jan. 16, 2026 at open.", "Option",
     "maturity_date",
     lambda v: 1 <= abs(v - parse_value("Jan. 16, 2026")) <= 30),
]


def test_random_range_conformance():
    start = time.time()
    draws = 10_000 // RANDOM_K + 1
    for name, text, category, subcategory, bounds in RANGE_CASES:
        mention = _mention(text, category, subcategory)
        checked = 0
        for seed in range(draws):
            variants = random_augment(text, mention, derive_rng(seed, name))
            values = [v.value for v in variants]
            assert len(set(values)) == len(values), name
            assert mention.value not in values, name
            for value in values:
                assert bounds(value), (name, seed, value)
                checked += 1
        assert checked >= 10_000, (name, checked)
    elapsed = time.time() - start
    assert elapsed < 30
    ok(f"random ranges conform for {len(RANGE_CASES)} category branches, "
       f"10,000+ variants each ({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# criterion 5: motivating-example distance anchors

def test_distance_anchors():
    assert numerical_distance(parse_value("3.56"), parse_value("4")) == \
        Decimal("0.44")
    assert numerical_distance(parse_value("4"), parse_value("40")) == Decimal(36)
    ok('distance anchors d("3.56","4")=0.44 and d("4","40")=36 exact')


# ---------------------------------------------------------------------------
# criterion 6: filter boundary (3 bad kept, 4 bad discarded)

def test_filter_rule_boundary():
    three = unit_with_scores(3)
    four = unit_with_scores(4)
    reports = [validate_unit(three), validate_unit(four)]
    kept = filter_units([three, four], reports)
    assert kept == [three]
    assert reports[0].kept and not reports[1].kept
    ok("filter boundary: 3 sub-threshold variants kept, 4 discarded")


# ---------------------------------------------------------------------------
# criterion 7: byte-identical pipeline artifacts across runs and workers

GOLDEN_SHA256 = {
    # frozen from the first verified run of this implementation
    "sentences.jsonl": "a61f5a21b8050a83abd5457f9b675118e5469445c9d5c93a43c40a3d1c3e1f92",
    "units.jsonl": "20b7b87412b0d7b45dcc36401ab3e58f0fe4b22514019822fe466f7b3d438b32",
    "validity.jsonl": "4804a4196d6afe5a5622dfd233b8482a43f80f1d7f32d1af315710c0e72d658b",
    "results.json": "4a97db8b71e762125e69fe22aed61d2422eea4442e87eba6e66471375b849d36",
    "report.txt": "d50f67a8cc36e839048f05c81ef4c52ec5aa96650df4b2c61780f2955bc9de16",
}


def _pipeline(out: Path, workers: int) -> dict:
    base = ["--out", str(out), "--seed", "7"]
    assert main(["extract", *base, "--corpus", fixture_corpus_path()]) == 0
    assert main(["augment", *base, "--workers", str(workers)]) == 0
    assert main(["validate", *base]) == 0
    assert main(["evaluate", *base, "--scorer", "lexical_overlap",
                 "--cross-pairs", "2000"]) == 0
    assert main(["report", *base]) == 0
    return {name: hashlib.sha256((out / name).read_bytes()).hexdigest()
            for name in GOLDEN_SHA256}


def test_pipeline_determinism(tmp_path):
    first = _pipeline(tmp_path / "a", workers=1)
    second = _pipeline(tmp_path / "b", workers=1)
    parallel = _pipeline(tmp_path / "c", workers=4)
    assert first == second == parallel
    assert first == GOLDEN_SHA256
    ok("pipeline artifacts byte-identical across runs and worker counts, "
       "matching the frozen golden digests")
