"""Long-running scorer process speaking the line-delimited JSON protocol.

Reads request lines {id, candidate, reference} on stdin and emits one
{id, score} reply line per request. Degenerate pairs (empty or non-string
sentences) get a per-pair {id, error} marker instead of killing the batch.
Requests are scored in opportunistic batches: the loop blocks for the first
pending line, then drains whatever else has already arrived, up to the
configured batch size.
"""

from __future__ import annotations

import argparse
import json
import queue
import sys
import threading

from .scoring import BridgeConfig, load_scorer


def _parse_args(argv=None) -> BridgeConfig:
    parser = argparse.ArgumentParser(
        prog="bertscore-bridge",
        description="Serve a BERTScore checkpoint over stdin/stdout")
    parser.add_argument("--checkpoint", required=True,
                        help="model name or local path")
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--layer", type=int, default=None,
                        help="hidden layer to score with (default: the "
                             "checkpoint's reference layer, else the last)")
    parser.add_argument("--local-files-only", action="store_true")
    args = parser.parse_args(argv)
    return BridgeConfig(checkpoint=args.checkpoint, batch_size=args.batch_size,
                        device=args.device, layer=args.layer,
                        local_files_only=args.local_files_only)


def _reader(out: "queue.Queue[str | None]") -> None:
    for line in sys.stdin:
        out.put(line)
    out.put(None)


def _emit(reply: dict) -> None:
    sys.stdout.write(json.dumps(reply, ensure_ascii=False) + "\n")


def _valid_sentence(value) -> bool:
    return isinstance(value, str) and bool(value.strip())


def serve(config: BridgeConfig) -> int:
    try:
        scorer = load_scorer(config)
    except Exception as exc:
        sys.stderr.write(f"bertscore-bridge: cannot load checkpoint "
                         f"{config.checkpoint!r}: {exc}\n")
        return 2

    lines: "queue.Queue[str | None]" = queue.Queue()
    threading.Thread(target=_reader, args=(lines,), daemon=True).start()

    done = False
    while not done:
        batch: list[dict] = []
        line = lines.get()
        while True:
            if line is None:
                done = True
                break
            line = line.strip()
            if line:
                try:
                    request = json.loads(line)
                except json.JSONDecodeError:
                    sys.stderr.write(f"bertscore-bridge: skipping non-JSON "
                                     f"line {line[:80]!r}\n")
                    request = None
                if isinstance(request, dict):
                    batch.append(request)
            if len(batch) >= config.batch_size:
                break
            try:
                line = lines.get_nowait()
            except queue.Empty:
                break

        if not batch:
            continue
        scorable = []
        for request in batch:
            rid = request.get("id")
            if rid is None:
                sys.stderr.write("bertscore-bridge: request without id dropped\n")
                continue
            if not (_valid_sentence(request.get("candidate"))
                    and _valid_sentence(request.get("reference"))):
                _emit({"id": rid, "error": "empty or non-string sentence"})
                continue
            scorable.append(request)
        if scorable:
            try:
                scores = scorer.score_pairs(
                    [r["candidate"] for r in scorable],
                    [r["reference"] for r in scorable])
                for request, score in zip(scorable, scores):
                    _emit({"id": request["id"], "score": round(float(score), 6)})
            except Exception as exc:
                for request in scorable:
                    _emit({"id": request["id"], "error": f"scoring failed: {exc}"})
        sys.stdout.flush()
    return 0


def main(argv=None) -> int:
    return serve(_parse_args(argv))


if __name__ == "__main__":
    raise SystemExit(main())
