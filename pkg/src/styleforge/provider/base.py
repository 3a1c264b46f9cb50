"""Provider interface and the shared call transcript."""

from __future__ import annotations

import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass

from .types import ChatRequest, CostLedger, ImageGenRequest, ProviderResponse


@dataclass(frozen=True)
class TranscriptEntry:
    """One provider call, as seen from outside the provider."""

    kind: str  # "chat" | "image"
    digest: str
    summary: str  # head of the last user text / image prompt


class Transcript:
    """Thread-safe append-only log of provider calls, for audits."""

    def __init__(self):
        self._lock = threading.Lock()
        self._entries: list[TranscriptEntry] = []

    def add(self, entry: TranscriptEntry) -> None:
        with self._lock:
            self._entries.append(entry)

    @property
    def entries(self) -> list[TranscriptEntry]:
        with self._lock:
            return list(self._entries)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


class Provider(ABC):
    """A multimodal chat model plus a text-to-image generator.

    Instances are shareable across worker threads; each call is
    independent and the ledger/transcript are internally locked.
    """

    def __init__(self):
        self.ledger = CostLedger()
        self.transcript = Transcript()

    @abstractmethod
    def chat(self, req: ChatRequest) -> ProviderResponse:
        """Return the model's text completion for a validated request."""

    @abstractmethod
    def generate_image(self, req: ImageGenRequest) -> ProviderResponse:
        """Return one raster image for a validated request."""


def summarize_chat(req: ChatRequest) -> str:
    for turn in reversed(req.turns):
        if turn.role == "user":
            return turn.text()[:400]
    return ""
