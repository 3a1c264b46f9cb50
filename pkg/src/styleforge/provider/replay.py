"""Record-and-replay providers for offline, deterministic runs.

A session file is a single JSON document mapping request digests to
responses::

    {
      "<sha256>": {"kind": "chat", "response_text": "..."},
      "<sha256>": {"kind": "image", "response_image_b64": "..."},
      "<sha256>": [entry, entry, ...]
    }

The common case is one entry per digest, served however many times the
request recurs (a pure content-addressed lookup, so call order never
matters). When a live run answered the *same* request differently on
repeat calls (image generators are not deterministic: regeneration after
a failed verification reissues an identical request), recording stores an
array and replay serves it positionally; asking for more responses than
were recorded is a hard error naming the digest.
"""

from __future__ import annotations

import base64
import json
import threading
from pathlib import Path

from ..errors import ReplayMissError
from .base import Provider, TranscriptEntry, summarize_chat
from .digest import chat_digest, image_digest
from .types import ChatRequest, ImageGenRequest, ProviderResponse, Usage


def _encode(kind: str, resp: ProviderResponse) -> dict:
    if kind == "chat":
        return {"kind": "chat", "response_text": resp.text}
    return {"kind": "image", "response_image_b64": base64.b64encode(resp.image).decode("ascii")}


def _decode(entry: dict) -> ProviderResponse:
    if entry["kind"] == "chat":
        return ProviderResponse(text=entry["response_text"], usage=Usage())
    data = base64.b64decode(entry["response_image_b64"])
    return ProviderResponse(image=data, usage=Usage())


class RecordingProvider(Provider):
    """Wraps a live provider and persists every (digest -> response) pair."""

    def __init__(self, inner: Provider, session_path: str | Path):
        super().__init__()
        self.inner = inner
        self.session_path = Path(session_path)
        self._lock = threading.Lock()
        self._entries: dict[str, object] = {}

    def _record(self, digest: str, kind: str, resp: ProviderResponse) -> None:
        entry = _encode(kind, resp)
        with self._lock:
            existing = self._entries.get(digest)
            if existing is None:
                self._entries[digest] = entry
            elif isinstance(existing, list):
                existing.append(entry)
            elif existing == entry:
                # identical repeat: keep the pure single-entry mapping
                pass
            else:
                self._entries[digest] = [existing, entry]

    def chat(self, req: ChatRequest) -> ProviderResponse:
        req.validate()
        digest = chat_digest(req)
        resp = self.inner.chat(req)
        self._record(digest, "chat", resp)
        self.ledger.add("chat", resp.usage)
        self.transcript.add(TranscriptEntry("chat", digest, summarize_chat(req)))
        return resp

    def generate_image(self, req: ImageGenRequest) -> ProviderResponse:
        req.validate()
        digest = image_digest(req)
        resp = self.inner.generate_image(req)
        self._record(digest, "image", resp)
        self.ledger.add("image", resp.usage)
        self.transcript.add(TranscriptEntry("image", digest, req.prompt[:80]))
        return resp

    def save(self) -> None:
        self.session_path.parent.mkdir(parents=True, exist_ok=True)
        with self._lock:
            doc = dict(sorted(self._entries.items()))
        tmp = self.session_path.with_suffix(self.session_path.suffix + ".tmp")
        tmp.write_text(json.dumps(doc, indent=1, sort_keys=True), encoding="utf-8")
        tmp.replace(self.session_path)


class ReplayProvider(Provider):
    """Serves recorded responses keyed by request digest; never touches the network."""

    def __init__(self, session_path: str | Path):
        super().__init__()
        self.session_path = Path(session_path)
        self._entries = json.loads(self.session_path.read_text(encoding="utf-8"))
        self._lock = threading.Lock()
        self._served: dict[str, int] = {}

    def _lookup(self, digest: str) -> ProviderResponse:
        entry = self._entries.get(digest)
        if entry is None:
            raise ReplayMissError(digest)
        if isinstance(entry, list):
            with self._lock:
                idx = self._served.get(digest, 0)
                if idx >= len(entry):
                    raise ReplayMissError(digest, served=len(entry))
                self._served[digest] = idx + 1
            return _decode(entry[idx])
        return _decode(entry)

    def chat(self, req: ChatRequest) -> ProviderResponse:
        req.validate()
        digest = chat_digest(req)
        resp = self._lookup(digest)
        self.ledger.add("chat", resp.usage)
        self.transcript.add(TranscriptEntry("chat", digest, summarize_chat(req)))
        return resp

    def generate_image(self, req: ImageGenRequest) -> ProviderResponse:
        req.validate()
        digest = image_digest(req)
        resp = self._lookup(digest)
        self.ledger.add("image", resp.usage)
        self.transcript.add(TranscriptEntry("image", digest, req.prompt[:80]))
        return resp
