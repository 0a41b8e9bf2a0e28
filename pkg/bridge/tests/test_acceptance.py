"""Bridge acceptance checks that need the pinned real checkpoint.

These run whenever `bert-base-uncased` is resolvable (local cache or
network); in an offline sandbox without cached weights they skip with an
explicit reason rather than asserting against a stand-in model.
"""

import json
import shutil
import subprocess
import sys
import time

import pytest

PINNED = "bert-base-uncased"


def _pinned_available() -> bool:
    try:
        from transformers import AutoConfig, AutoTokenizer
        AutoConfig.from_pretrained(PINNED)
        AutoTokenizer.from_pretrained(PINNED)
        return True
    except Exception:
        return False


pinned_checkpoint = pytest.mark.skipif(
    not _pinned_available(),
    reason=f"{PINNED} is not resolvable here (no cached weights, no network); "
           f"run with the checkpoint available to execute this criterion")


def _score_pairs(pairs, batch_size=8):
    from bertscore_bridge.scoring import BridgeConfig, load_scorer
    scorer = load_scorer(BridgeConfig(checkpoint=PINNED, batch_size=batch_size))
    return scorer.score_pairs([c for c, _ in pairs], [r for _, r in pairs])


@pinned_checkpoint
def test_motivating_inversion_reproduced():
    """The numerically closer pair must score LOWER than the 10x pair,
    reproducing the counterintuitive ordering; value anchors are soft."""
    s1 = "Revenue increased by 3.56%."
    s2 = "Revenue increased by 4%."
    s3 = "Revenue increased by 40%."
    close, far = _score_pairs([(s1, s2), (s2, s3)])
    assert close < far
    assert close == pytest.approx(0.9639, abs=0.02)
    assert far == pytest.approx(0.9764, abs=0.02)
    print(f"\nACCEPTANCE PASS: inversion {close:.4f} < {far:.4f}")


@pinned_checkpoint
def test_directional_results_at_desk_scale(tmp_path):
    """Qualitative orderings on the bundled ~200-unit fixture: triplet
    accuracy above listwise pairwise agreement, rule-based triplet accuracy
    at or below random, cross-pair accuracy near chance."""
    start = time.time()
    numprobe = shutil.which("numprobe")
    assert numprobe, "primary CLI must be installed"
    corpus = subprocess.run(
        [sys.executable, "-c",
         "import numprobe; print(numprobe.fixture_corpus_path())"],
        capture_output=True, text=True, check=True).stdout.strip()
    out = tmp_path / "run"
    base = ["--out", str(out), "--seed", "7"]
    cmd = (f"{sys.executable} -m bertscore_bridge.server "
           f"--checkpoint {PINNED} --batch-size 64")
    steps = [
        ["extract", *base, "--corpus", corpus],
        ["augment", *base],
        ["validate", *base],
        ["evaluate", *base, "--scorer-cmd", cmd, "--cross-pairs", "4000",
         "--batch-size", "64"],
    ]
    for step in steps:
        result = subprocess.run([numprobe, *step], capture_output=True,
                                text=True, timeout=870)
        assert result.returncode == 0, (step, result.stderr)
    data = json.loads((out / "results.json").read_text(encoding="utf-8"))
    protocols = data["protocols"]

    triplet = protocols["triplet"]["value"]
    agreement = data["listwise_pairwise_agreement"]
    assert triplet > agreement

    by_family = protocols["triplet"]["by_stratum"]
    assert by_family["rule_based"]["value"] <= by_family["random"]["value"]

    cross = protocols["cross_pair"]["value"]
    assert 0.40 <= cross <= 0.60

    elapsed = time.time() - start
    assert elapsed < 15 * 60
    print(f"\nACCEPTANCE PASS: desk-scale ordering (triplet {triplet:.4f} > "
          f"pairwise {agreement:.4f}, cross-pair {cross:.4f}, {elapsed:.0f}s)")
