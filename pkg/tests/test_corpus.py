import json

import pytest

from numprobe import fixture_corpus_path
from numprobe.corpus import annotate_labels, load_corpus, serialize_corpus
from numprobe.errors import SchemaError
from numprobe.numerals import LABEL_TABLE


def write_jsonl(path, rows):
    path.write_text("\n".join(json.dumps(r, separators=(",", ":"))
                              for r in rows) + "\n", encoding="utf-8")
    return str(path)


def test_single_numeral_record(tmp_path):
    path = write_jsonl(tmp_path / "c.jsonl",
                       [{"id": "a1", "text": "Revenue increased by 4%."}])
    corpus = load_corpus(path)
    assert len(corpus) == 1
    assert len(corpus[0].mentions) == 1
    assert corpus[0].mentions[0].raw == "4"


def test_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("", encoding="utf-8")
    assert load_corpus(str(path)) == []


def test_duplicate_id_error(tmp_path):
    path = write_jsonl(tmp_path / "dup.jsonl",
                       [{"id": "x", "text": "up 4%"}, {"id": "x", "text": "up 5%"}])
    with pytest.raises(SchemaError) as err:
        load_corpus(path)
    assert "duplicate id" in str(err.value)
    assert ":2" in str(err.value)


def test_malformed_record_names_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id":"a","text":"ok 4%"}\nnot json\n', encoding="utf-8")
    with pytest.raises(SchemaError) as err:
        load_corpus(str(path))
    assert ":2" in str(err.value)


def test_mentionless_record_retained(tmp_path):
    path = write_jsonl(tmp_path / "c.jsonl",
                       [{"id": "a", "text": "nothing numeric at all"}])
    corpus = load_corpus(path)
    assert corpus[0].mentions == []


def test_csv_load(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text('id,text,source\nr1,"Shares rose 7% today.",news\n',
                    encoding="utf-8")
    corpus = load_corpus(str(path), format="csv")
    assert corpus[0].source == "news"
    assert corpus[0].mentions[0].raw == "7"


def test_serialize_round_trip_bytes(tmp_path):
    original = open(fixture_corpus_path(), encoding="utf-8").read()
    corpus = load_corpus(fixture_corpus_path())
    assert serialize_corpus(corpus) == original


def test_input_labels_attached_and_legal():
    corpus = load_corpus(fixture_corpus_path())
    labeled = [m for s in corpus for m in s.mentions if m.label is not None]
    assert labeled, "fixture carries labels"
    for m in labeled:
        assert (m.label.category, m.label.subcategory) in LABEL_TABLE


class FakeAnnotator:
    """In-process annotator adapter with the wire semantics."""

    def __init__(self, mapping):
        self.mapping = mapping
        self.calls = 0

    def __call__(self, requests):
        self.calls += 1
        return [{"id": r["id"], "targets": self.mapping.get(r["id"], [])}
                for r in requests]


def test_annotate_labels_paths(tmp_path):
    rows = [
        {"id": "a", "text": "During 2024, sales split 38% and 62%."},
        {"id": "b", "text": "a low of $138.80 per share."},
    ]
    path = write_jsonl(tmp_path / "c.jsonl", rows)
    corpus = load_corpus(path)
    annotator = FakeAnnotator({
        "a": [{"raw": "2024", "category": "Temporal", "subcategory": "date"},
              {"raw": "38", "category": "Percentage", "subcategory": "absolute"}],
        "b": [{"raw": "138.80", "category": "Monetary", "subcategory": "quote"}],
    })
    annotate_labels(corpus, annotator)
    a, b = corpus
    assert (a.mentions[0].label.category, a.mentions[0].label.subcategory) == \
        ("Temporal", "date")
    assert (a.mentions[1].label.category, a.mentions[1].label.subcategory) == \
        ("Percentage", "absolute")
    # the adapter never labeled 62: Quantity fallback applies
    assert a.mentions[2].label.category == "Quantity"
    assert b.mentions[0].label.subcategory == "quote"


def test_annotator_failure_keeps_running(tmp_path):
    path = write_jsonl(tmp_path / "c.jsonl", [{"id": "a", "text": "up 4%"}])
    corpus = load_corpus(path)

    def broken(requests):
        raise RuntimeError("adapter fell over")

    annotate_labels(corpus, broken)
    assert corpus[0].mentions[0].label.category == "Quantity"


def test_input_labels_take_precedence(tmp_path):
    rows = [{"id": "a", "text": "up 4% today",
             "labels": [{"target": "4", "category": "Percentage",
                         "subcategory": "relative"}]}]
    path = write_jsonl(tmp_path / "c.jsonl", rows)
    corpus = load_corpus(path)
    annotator = FakeAnnotator(
        {"a": [{"raw": "4", "category": "Quantity", "subcategory": "quantity"}]})
    annotate_labels(corpus, annotator)
    assert corpus[0].mentions[0].label.category == "Percentage"
    assert annotator.calls == 0  # nothing was pending
