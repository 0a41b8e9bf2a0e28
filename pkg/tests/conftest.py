import json
from pathlib import Path

import pytest

from numprobe import fixture_corpus_path
from numprobe.augment import FAMILY_RANDOM, FAMILY_RULE, make_units
from numprobe.corpus import load_corpus
from numprobe.numerals import extract_numerals
from numprobe.protocols import fill_distances


def sentence_with(text):
    """Single-sentence helper returning (text, first mention)."""
    mentions = extract_numerals(text)
    assert mentions, f"no mention found in {text!r}"
    return text, mentions[0]


def synthetic_corpus(n_per_template=25):
    """Deterministic labeled corpus large enough for >= 500 units.

    Templates cover every category branch; values vary with the index so
    cross-pair gold comparisons are non-degenerate. Each template yields
    exactly one mention, labeled via extraction.
    """
    from numprobe.numerals import canonical_digits

    templates = [
        ("pct", "Margins improved {v}% against guidance.",
         lambda i: str(30 + i), "Percentage", "relative"),
        ("mon", "The stock traded near ${v} by the close.",
         lambda i: f"{40 + i}.{(i * 7) % 100:02d}", "Monetary", "quote"),
        ("qty", "The plant shipped {v} units last month.",
         lambda i: str(120 + 11 * i), "Quantity", "quantity"),
        ("scale", "Operating costs reached {v} million overall.",
         lambda i: str(110 + 3 * i), "Monetary", "money"),
        ("date", "The warrants expire on Sep. {v}, 2025 at noon.",
         lambda i: str(1 + (i % 28)), "Temporal", "date"),
        ("time", "The halt lifted at {v} PM yesterday.",
         lambda i: f"{1 + (i % 11)}:{(i * 13) % 60:02d}", "Temporal", "time"),
        ("dur", "Delivery slips by {v} weeks under the new plan.",
         lambda i: str(2 + (i % 7)), "Temporal", "date"),
        ("frac", "The ratio slid to {v} in the stress case.",
         lambda i: f"0.{10 + i:02d}", "Quantity", "quantity"),
        ("ind", "The oscillator printed {v} on the weekly chart.",
         lambda i: str(20 + 4 * i), "Indicator", "indicator"),
        ("prod", "Model {v} ships with the updated sensor.",
         lambda i: str(11 + i), "ProductNumber", "product_number"),
    ]
    lines = []
    for name, template, value_fn, category, subcategory in templates:
        for i in range(n_per_template):
            text = template.replace("{v}", value_fn(i))
            mentions = extract_numerals(text)
            assert len(mentions) == 1, (text, [m.raw for m in mentions])
            lines.append({"id": f"{name}{i:03d}", "text": text,
                          "labels": [{"target": canonical_digits(mentions[0].raw),
                                      "category": category,
                                      "subcategory": subcategory}]})
    return lines


@pytest.fixture(scope="session")
def synthetic_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "synthetic.jsonl"
    rows = synthetic_corpus()
    path.write_text("\n".join(json.dumps(r, separators=(",", ":"))
                              for r in rows) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def synthetic_units(synthetic_path):
    corpus = load_corpus(str(synthetic_path))
    units = make_units(corpus, {FAMILY_RANDOM, FAMILY_RULE}, seed=11)
    fill_distances(units)
    return units


@pytest.fixture(scope="session")
def fixture_units():
    corpus = load_corpus(fixture_corpus_path())
    units = make_units(corpus, {FAMILY_RANDOM, FAMILY_RULE}, seed=7)
    fill_distances(units)
    return units


@pytest.fixture()
def fixture_path():
    return Path(fixture_corpus_path())
