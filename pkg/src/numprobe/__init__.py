"""numprobe: controlled numerical perturbations for text-similarity metrics.

Builds evaluation units by perturbing numerals in financial sentences,
filters them for validity, and measures whether a similarity scorer respects
numerical distance under triplet, listwise, and cross-pair protocols.
"""

from importlib import resources

__version__ = "0.1.0"


def load_prompt(name: str) -> str:
    """Bundled adapter prompt template ('number_identification' or
    'sentence_validation')."""
    return (resources.files("numprobe") / "prompts" / f"{name}.txt").read_text(
        encoding="utf-8")


def fixture_corpus_path() -> str:
    """Path of the bundled 50-sentence fixture corpus."""
    return str(resources.files("numprobe") / "data" / "corpus_50.jsonl")
