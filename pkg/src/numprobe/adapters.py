"""Line-delimited JSON adapter transport.

Adapters are child processes that read one JSON request per line on stdin
and write one JSON reply per line on stdout. One client instance keeps one
process alive across batches; replies are collected until every request id
has been answered or the timeout lapses, so reply order never matters.
"""

from __future__ import annotations

import json
import logging
import queue
import shlex
import subprocess
import threading
from typing import Optional

from .errors import AdapterError

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 60.0


class SubprocessAdapter:
    """Callable adapter: list of request dicts -> list of reply dicts."""

    def __init__(self, command: str, timeout: float = DEFAULT_TIMEOUT,
                 id_fields: tuple[str, ...] = ("id",)):
        self.command = command
        self.timeout = timeout
        self.id_fields = id_fields
        self._proc: Optional[subprocess.Popen] = None
        self._queue: "queue.Queue[Optional[str]]" = queue.Queue()
        self._reader: Optional[threading.Thread] = None

    def _key(self, record: dict):
        return tuple(record.get(f) for f in self.id_fields)

    def _ensure_started(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            return
        try:
            self._proc = subprocess.Popen(
                shlex.split(self.command), stdin=subprocess.PIPE,
                stdout=subprocess.PIPE, text=True, bufsize=1)
        except OSError as exc:
            raise AdapterError(f"cannot start adapter {self.command!r}: {exc}")
        self._queue = queue.Queue()
        self._reader = threading.Thread(target=self._drain, daemon=True)
        self._reader.start()

    def _drain(self) -> None:
        proc = self._proc
        assert proc is not None and proc.stdout is not None
        for line in proc.stdout:
            self._queue.put(line)
        self._queue.put(None)

    def __call__(self, requests: list[dict]) -> list[dict]:
        if not requests:
            return []
        self._ensure_started()
        proc = self._proc
        assert proc is not None and proc.stdin is not None
        pending = {self._key(r) for r in requests}
        try:
            for request in requests:
                proc.stdin.write(json.dumps(request, ensure_ascii=False) + "\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            self.close()
            raise AdapterError(f"adapter {self.command!r} pipe failed: {exc}")

        replies: list[dict] = []
        while pending:
            try:
                line = self._queue.get(timeout=self.timeout)
            except queue.Empty:
                logger.warning("adapter %r timed out with %d replies missing",
                               self.command, len(pending))
                break
            if line is None:
                logger.warning("adapter %r closed stdout with %d replies missing",
                               self.command, len(pending))
                self.close()
                break
            line = line.strip()
            if not line:
                continue
            try:
                reply = json.loads(line)
            except json.JSONDecodeError:
                logger.warning("adapter %r emitted non-JSON line %r",
                               self.command, line[:120])
                continue
            if isinstance(reply, dict):
                replies.append(reply)
                pending.discard(self._key(reply))
        return replies

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            try:
                self._proc.stdin.close()
                self._proc.wait(timeout=5)
            except Exception:
                self._proc.kill()
        self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def annotator_adapter(command: str, timeout: float = DEFAULT_TIMEOUT) -> SubprocessAdapter:
    return SubprocessAdapter(command, timeout, id_fields=("id",))


def validator_adapter(command: str, timeout: float = DEFAULT_TIMEOUT) -> SubprocessAdapter:
    return SubprocessAdapter(command, timeout, id_fields=("unit_id", "variant_index"))


def scorer_adapter(command: str, timeout: float = DEFAULT_TIMEOUT) -> SubprocessAdapter:
    return SubprocessAdapter(command, timeout, id_fields=("id",))


__all__ = ["DEFAULT_TIMEOUT", "SubprocessAdapter", "annotator_adapter",
           "scorer_adapter", "validator_adapter"]
