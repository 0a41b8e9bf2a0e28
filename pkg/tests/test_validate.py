from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from numprobe.augment import (AugmentationSpec, EvaluationUnit, FAMILY_RANDOM,
                              Variant)
from numprobe.corpus import BaseSentence
from numprobe.errors import NumprobeError
from numprobe.numerals import FinNumLabel, extract_numerals
from numprobe.validate import (builtin_validate, external_validate,
                               filter_units, validate_unit)


def make_unit(text, category, subcategory, variants, unit_id="u1"):
    mentions = extract_numerals(text)
    mentions[0].label = FinNumLabel(category, subcategory)
    base = BaseSentence(id="b1", text=text, mentions=mentions)
    return EvaluationUnit(unit_id=unit_id, base=base, target=0,
                          spec=AugmentationSpec(FAMILY_RANDOM),
                          variants=variants)


class TestBuiltinValidate:
    def test_calendar_violation(self):
        text = "Due on Feb. 28, 2025 sharp."
        (mention,) = [m for m in extract_numerals(text) if m.kind == "date"]
        bad = "Due on Feb. 31, 2025 sharp."
        score, reason = builtin_validate(bad, None, mention)
        assert score == 0.0
        assert "calendar" in reason

    def test_february_31st_shape(self):
        text = "Filed on January 28 this year."
        (mention,) = extract_numerals(text)
        score, reason = builtin_validate("Filed on February 31st this year.",
                                         None, mention)
        assert score == 0.0

    def test_malformed_time_minutes(self):
        text = "Alert sent at 9:40 AM ET."
        (mention,) = extract_numerals(text)
        score, reason = builtin_validate("Alert sent at 9:4 AM ET.", None, mention)
        assert score == 0.0
        assert "two digits" in reason

    def test_minute_out_of_range(self):
        text = "Alert sent at 9:40 AM ET."
        (mention,) = extract_numerals(text)
        score, _ = builtin_validate("Alert sent at 9:75 AM ET.", None, mention)
        assert score == 0.0

    def test_unchanged_variant_is_valid(self):
        text = "Shares rose 4% in a day."
        (mention,) = extract_numerals(text)
        mention.label = FinNumLabel("Percentage", "relative")
        score, reason = builtin_validate(text, Decimal(4), mention)
        assert score == 1.0 and reason == ""

    def test_structural_breakage(self):
        text = "Shares rose 4% in a day."
        (mention,) = extract_numerals(text)
        score, reason = builtin_validate("Shares rose x% in a day.", None, mention)
        assert score == 0.0
        assert "structural" in reason

    def test_absolute_percentage_plausibility(self):
        text = "Margin was 60% of sales."
        (mention,) = extract_numerals(text)
        mention.label = FinNumLabel("Percentage", "absolute")
        score, reason = builtin_validate("Margin was 120% of sales.", Decimal(120),
                                         mention)
        assert score == 0.4
        # relative percentages are exempt
        mention.label = FinNumLabel("Percentage", "relative")
        score, _ = builtin_validate("Margin was 120% of sales.", Decimal(120),
                                    mention)
        assert score == 1.0

    def test_determinism(self):
        text = "Shares rose 4% in a day."
        (mention,) = extract_numerals(text)
        first = builtin_validate("Shares rose 7% in a day.", Decimal(7), mention)
        second = builtin_validate("Shares rose 7% in a day.", Decimal(7), mention)
        assert first == second


def unit_with_scores(bad_count, k=9, unit_id=None):
    """Unit whose first bad_count variants are structurally broken."""
    text = "Shares rose 4% in a day."
    variants = []
    for i in range(k):
        if i < bad_count:
            variants.append(Variant(text="Shares rose x% in a day.",
                                    value=Decimal(7)))
        else:
            variants.append(Variant(text=f"Shares rose {5 + i}% in a day.",
                                    value=Decimal(5 + i)))
    return make_unit(text, "Percentage", "relative", variants,
                     unit_id=unit_id or f"u-bad{bad_count}-k{k}")


class TestFilterRule:
    @pytest.mark.parametrize("bad,kept", [(0, True), (3, True), (4, False),
                                          (9, False)])
    def test_boundary(self, bad, kept):
        unit = unit_with_scores(bad)
        report = validate_unit(unit)
        assert report.kept is kept
        assert filter_units([unit], [report]) == ([unit] if kept else [])

    def test_single_variant_unit_always_passes_literal_rule(self):
        unit = unit_with_scores(1, k=1)
        report = validate_unit(unit)
        assert report.scores == [0.0]
        assert report.kept

    def test_proportional_mode(self):
        unit = unit_with_scores(1, k=1)
        report = validate_unit(unit, proportional=True)
        assert not report.kept  # 1 bad > 1/3

    def test_missing_report_is_an_error(self):
        unit = unit_with_scores(0)
        with pytest.raises(NumprobeError):
            filter_units([unit], [])

    def test_kept_units_retain_low_scoring_variants(self):
        unit = unit_with_scores(2)
        report = validate_unit(unit)
        kept = filter_units([unit], [report])
        assert len(kept[0].variants) == 9

    @given(st.lists(st.floats(min_value=0, max_value=1), min_size=1, max_size=9),
           st.integers(min_value=0, max_value=8))
    @settings(max_examples=200)
    def test_filter_monotonicity(self, scores, bump_index):
        """Raising any score never flips kept -> discarded."""
        bad_before = sum(1 for s in scores if s < 0.5)
        bumped = list(scores)
        if bump_index < len(bumped):
            bumped[bump_index] = min(1.0, bumped[bump_index] + 0.6)
        bad_after = sum(1 for s in bumped if s < 0.5)
        assert (bad_before <= 3) <= (bad_after <= 3)


def test_retention_rate_on_bundled_fixture(fixture_units):
    reports = [validate_unit(u) for u in fixture_units]
    retention = sum(1 for r in reports if r.kept) / len(reports)
    assert 0.5 <= retention <= 1.0


class TestExternalValidate:
    def test_adapter_overrides_and_fallback(self):
        unit = unit_with_scores(0)
        calls = {}

        def validator(requests):
            calls["n"] = len(requests)
            out = []
            for r in requests:
                if r["variant_index"] == 0:
                    out.append({"unit_id": r["unit_id"],
                                "variant_index": 0, "valid": False,
                                "reason": "implausible move"})
                elif r["variant_index"] == 1:
                    out.append({"unit_id": r["unit_id"],
                                "variant_index": 1, "score": 0.7})
                # index 2+ unanswered: builtin fallback
            return out

        (report,) = external_validate([unit], validator)
        assert calls["n"] == 9
        assert report.scores[0] == 0.0
        assert report.scores[1] == 0.7
        assert report.scores[2] == 1.0
        assert any("implausible move" in r for r in report.reasons)
        assert any("builtin fallback" in r for r in report.reasons)

    def test_adapter_crash_falls_back_everywhere(self):
        unit = unit_with_scores(0)

        def validator(requests):
            raise RuntimeError("boom")

        (report,) = external_validate([unit], validator)
        assert report.scores == [1.0] * 9
        assert any("adapter failed" in r for r in report.reasons)
        assert report.kept
