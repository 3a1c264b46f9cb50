"""JSONL helpers with crash-tolerant append semantics.

Appends go through a single ``os.write`` of the full encoded line, so a
reader never observes an interleaved line from concurrent writers. A run
killed mid-write can still leave a torn final line without a trailing
newline; ``read_jsonl`` discards exactly that case so resumed runs pick
up from the last complete record.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path


def _trim_torn_tail(path: Path) -> None:
    """Drop a trailing fragment without a newline (a crash mid-append),
    so new appends start on their own line."""
    try:
        raw = path.read_bytes()
    except FileNotFoundError:
        return
    if not raw or raw.endswith(b"\n"):
        return
    keep = raw.rfind(b"\n") + 1
    with open(path, "rb+") as fh:
        fh.truncate(keep)


class JsonlWriter:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        _trim_torn_tail(self.path)
        self._lock = threading.Lock()
        self._fd = os.open(self.path, os.O_WRONLY | os.O_CREAT | os.O_APPEND, 0o644)

    def append(self, record: dict) -> None:
        line = json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n"
        data = line.encode("utf-8")
        with self._lock:
            os.write(self._fd, data)

    def close(self) -> None:
        with self._lock:
            if self._fd >= 0:
                os.close(self._fd)
                self._fd = -1

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_jsonl(path: str | Path) -> list[dict]:
    """All complete records in the file; a torn trailing line is dropped."""
    path = Path(path)
    if not path.exists():
        return []
    raw = path.read_text(encoding="utf-8")
    records = []
    lines = raw.split("\n")
    incomplete_tail = lines.pop() if lines and lines[-1] != "" else None
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        records.append(json.loads(line))
    if incomplete_tail and incomplete_tail.strip():
        try:
            records.append(json.loads(incomplete_tail))
        except json.JSONDecodeError:
            pass  # torn final line from an interrupted run
    return records
