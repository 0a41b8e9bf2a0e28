"""Pipeline orchestration: extract -> augment -> validate -> evaluate -> report.

Each stage reads its predecessor's JSONL from the output directory, writes
its own JSONL plus a small summary, and exits 0 on success, 2 on missing
input, 3 on a schema violation (naming the offending line), or 4 on adapter
failure. Given a fixed seed, artifacts are byte-identical across runs and
worker counts.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import sys
from pathlib import Path

from . import adapters, corpus, report, stages, validate
from .augment import FAMILY_RANDOM, FAMILY_RULE, RULES, make_units
from .errors import AdapterError, MissingInputError, NumprobeError, SchemaError
from .metrics import ExternalScorer, builtin_scorer
from .protocols import MODE_SURFACE, MODE_UNIT_NORMALIZED, fill_distances

logger = logging.getLogger(__name__)

SENTENCES = "sentences.jsonl"
UNITS = "units.jsonl"
VALIDITY = "validity.jsonl"
RESULTS = "results.json"
REPORT_TXT = "report.txt"
REPORT_JSON = "report.json"


def _write_summary(out: Path, stage: str, payload: dict) -> None:
    path = out / f"{stage}_summary.json"
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=2,
                               sort_keys=True) + "\n", encoding="utf-8")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# stages

def cmd_extract(args) -> int:
    out = _out_dir(args)
    path = Path(args.corpus)
    if not path.exists():
        raise MissingInputError(f"corpus file {path} does not exist")
    fmt = args.format or ("csv" if path.suffix == ".csv" else "jsonl")
    sentences = corpus.load_corpus(str(path), fmt)
    if args.annotator_cmd:
        with adapters.annotator_adapter(args.annotator_cmd) as annotator:
            corpus.annotate_labels(sentences, annotator)
    else:
        unlabeled = sum(1 for s in sentences for m in s.mentions if m.label is None)
        if unlabeled:
            logger.warning("%d mentions unlabeled; defaulting to Quantity", unlabeled)
            corpus.annotate_labels(sentences, lambda requests: [])
    count = stages.write_sentences(out / SENTENCES, sentences)
    mentions = sum(len(s.mentions) for s in sentences)
    _write_summary(out, "extract", {
        "sentences": count, "mentions": mentions,
        "mentionless": sum(1 for s in sentences if not s.mentions)})
    print(f"extract: {count} sentences, {mentions} mentions -> {out / SENTENCES}")
    return 0


def _units_for_sentence(task) -> list:
    sentence, families, rules, seed = task
    return make_units([sentence], families, seed, rules)


def cmd_augment(args) -> int:
    out = _out_dir(args)
    sentences = stages.read_sentences(out / SENTENCES)
    families = set(args.families.split(","))
    unknown = families - {FAMILY_RANDOM, FAMILY_RULE}
    if unknown:
        raise NumprobeError(f"unknown families {sorted(unknown)}")
    rules = args.rules.split(",") if args.rules else None
    if rules:
        bad = [r for r in rules if r not in RULES]
        if bad:
            raise NumprobeError(f"unknown rules {bad}; available: {', '.join(RULES)}")

    if args.workers > 1:
        tasks = [(s, families, rules, args.seed) for s in sentences]
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.workers) as pool:
            per_sentence = list(pool.map(_units_for_sentence, tasks, chunksize=8))
        units = [u for batch in per_sentence for u in batch]
    else:
        units = make_units(sentences, families, args.seed, rules)

    count = stages.write_units(out / UNITS, units)
    by_family: dict[str, int] = {}
    for u in units:
        by_family[u.spec.family] = by_family.get(u.spec.family, 0) + 1
    _write_summary(out, "augment", {
        "units": count, "seed": args.seed,
        "by_family": dict(sorted(by_family.items())),
        "variants": sum(len(u.variants) for u in units)})
    print(f"augment: {count} units -> {out / UNITS}")
    return 0


def cmd_validate(args) -> int:
    out = _out_dir(args)
    sentences = stages.read_sentences(out / SENTENCES)
    units = stages.read_units(out / UNITS, sentences)
    kwargs = dict(threshold=args.filter_threshold, max_bad=args.filter_max_bad,
                  proportional=args.filter_rule == "proportional")
    if args.validator == "external":
        if not args.validator_cmd:
            raise AdapterError("--validator external needs --validator-cmd")
        with adapters.validator_adapter(args.validator_cmd) as validator:
            reports = validate.external_validate(units, validator, **kwargs)
    else:
        reports = [validate.validate_unit(u, **kwargs) for u in units]
    stages.write_validity(out / VALIDITY, reports)
    kept = sum(1 for r in reports if r.kept)
    retention = kept / len(reports) if reports else 1.0
    _write_summary(out, "validate", {
        "units": len(reports), "kept": kept,
        "retention": round(retention, 6),
        "rule": args.filter_rule, "threshold": args.filter_threshold})
    print(f"validate: kept {kept}/{len(reports)} units "
          f"({retention:.2%}) -> {out / VALIDITY}")
    return 0


def _resolve_scorer(args):
    if args.scorer_cmd:
        adapter = adapters.scorer_adapter(args.scorer_cmd)
        name = f"cmd:{args.scorer_cmd}"
        return ExternalScorer(adapter, chunk_size=args.batch_size, name=name), name
    scorer = builtin_scorer(args.scorer, seed=args.seed)
    return scorer, args.scorer


def cmd_evaluate(args) -> int:
    out = _out_dir(args)
    sentences = stages.read_sentences(out / SENTENCES)
    units = stages.read_units(out / UNITS, sentences)
    reports = stages.read_validity(out / VALIDITY)
    units = validate.filter_units(units, reports,
                                  threshold=args.filter_threshold,
                                  max_bad=args.filter_max_bad)
    mode = MODE_UNIT_NORMALIZED if args.distance_mode == "unit_normalized" \
        else MODE_SURFACE
    fill_distances(units, mode)
    scorer, name = _resolve_scorer(args)
    result = report.evaluate_all(units, scorer, name, mode, args.seed,
                                 cross_pairs=args.cross_pairs)
    payload = report.report_to_dict(result)
    (out / RESULTS).write_text(
        json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    _write_summary(out, "evaluate", {
        "units": len(units), "scorer": name, "distance_mode": mode,
        "cross_pairs": args.cross_pairs})
    print(f"evaluate: {len(units)} units scored by {name} -> {out / RESULTS}")
    return 0


def cmd_report(args) -> int:
    out = _out_dir(args)
    path = out / RESULTS
    if not path.exists():
        raise MissingInputError(f"input file {path} does not exist")
    data = json.loads(path.read_text(encoding="utf-8"))
    result = report.report_from_dict(data)
    text = report.render_text(result)
    (out / REPORT_TXT).write_text(text, encoding="utf-8")
    (out / REPORT_JSON).write_text(
        json.dumps(report.report_to_dict(result), ensure_ascii=False,
                   indent=2, sort_keys=True) + "\n", encoding="utf-8")
    sys.stdout.write(text)
    return 0


def cmd_run(args) -> int:
    for fn in (cmd_extract, cmd_augment, cmd_validate, cmd_evaluate, cmd_report):
        code = fn(args)
        if code:
            return code
    return 0


# ---------------------------------------------------------------------------
# argument plumbing

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", required=True, help="artifact directory")
    parser.add_argument("--seed", type=int, default=7)


def _add_filter(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--filter-threshold", type=float, default=validate.THRESHOLD)
    parser.add_argument("--filter-max-bad", type=int, default=validate.MAX_BAD)


def _add_scorer(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scorer", default="lexical_overlap",
                        help="builtin scorer name")
    parser.add_argument("--scorer-cmd", default=None,
                        help="external scorer adapter command")
    parser.add_argument("--cross-pairs", type=int, default=10_000)
    parser.add_argument("--batch-size", type=int, default=256)
    parser.add_argument("--distance-mode", default="surface",
                        choices=["surface", "unit_normalized"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="numprobe",
        description="Numerical-sensitivity diagnostics for text-similarity metrics")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="load corpus, extract and label numerals")
    _add_common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=["jsonl", "csv"], default=None)
    p.add_argument("--annotator-cmd", default=None)
    p.set_defaults(fn=cmd_extract)

    p = sub.add_parser("augment", help="generate evaluation units")
    _add_common(p)
    p.add_argument("--families", default="random,rule_based")
    p.add_argument("--rules", default=None,
                   help="comma-separated subset of: " + ",".join(RULES))
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=cmd_augment)

    p = sub.add_parser("validate", help="score variant validity, mark kept units")
    _add_common(p)
    p.add_argument("--validator", choices=["builtin", "external"], default="builtin")
    p.add_argument("--validator-cmd", default=None)
    p.add_argument("--filter-rule", choices=["absolute", "proportional"],
                   default="absolute")
    _add_filter(p)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("evaluate", help="run the three protocols with a scorer")
    _add_common(p)
    _add_filter(p)
    _add_scorer(p)
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("report", help="render the results table")
    _add_common(p)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("run", help="all stages in sequence")
    _add_common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=["jsonl", "csv"], default=None)
    p.add_argument("--annotator-cmd", default=None)
    p.add_argument("--families", default="random,rule_based")
    p.add_argument("--rules", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--validator", choices=["builtin", "external"], default="builtin")
    p.add_argument("--validator-cmd", default=None)
    p.add_argument("--filter-rule", choices=["absolute", "proportional"],
                   default="absolute")
    _add_filter(p)
    _add_scorer(p)
    p.set_defaults(fn=cmd_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    try:
        return args.fn(args)
    except MissingInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except NumprobeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
