"""Request/response types shared by every provider backend."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

from ..errors import RequestValidationError

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
JPEG_MAGIC = b"\xff\xd8\xff"


def sniff_media_type(data: bytes) -> str:
    """Return the media type of a raster payload (PNG or JPEG only)."""
    if data.startswith(PNG_MAGIC):
        return "image/png"
    if data.startswith(JPEG_MAGIC):
        return "image/jpeg"
    raise RequestValidationError("image payload is neither PNG nor JPEG")


@dataclass(frozen=True)
class SamplingParams:
    """Sampling controls. Unset fields are NOT sent, so provider defaults apply."""

    model_id: str
    temperature: float | None = None
    top_p: float | None = None


@dataclass(frozen=True)
class TextPart:
    text: str


@dataclass(frozen=True)
class ImagePart:
    data: bytes
    media_type: str

    @classmethod
    def from_bytes(cls, data: bytes) -> "ImagePart":
        return cls(data=data, media_type=sniff_media_type(data))


@dataclass(frozen=True)
class Turn:
    role: str  # "user" | "assistant"
    parts: tuple = ()  # mix of TextPart / ImagePart, in order

    def text(self) -> str:
        return "\n".join(p.text for p in self.parts if isinstance(p, TextPart))


@dataclass(frozen=True)
class ChatRequest:
    system_prompt: str
    turns: tuple  # ordered Turn objects
    sampling: SamplingParams

    def validate(self) -> None:
        if not any(t.role == "user" for t in self.turns):
            raise RequestValidationError("chat request needs at least one user turn")
        for turn in self.turns:
            if turn.role not in ("user", "assistant"):
                raise RequestValidationError(f"unknown turn role {turn.role!r}")
            if not turn.parts:
                raise RequestValidationError("turn has no parts")
            for part in turn.parts:
                if isinstance(part, ImagePart):
                    if not part.data:
                        raise RequestValidationError("empty image attachment")
                    # raises if not a supported raster format
                    sniff_media_type(part.data)


@dataclass(frozen=True)
class ImageGenRequest:
    prompt: str
    size: tuple[int, int]
    model_id: str

    def validate(self) -> None:
        if not self.prompt.strip():
            raise RequestValidationError("image generation prompt is empty")
        w, h = self.size
        if w <= 0 or h <= 0:
            raise RequestValidationError(f"image size must be positive, got {self.size}")


@dataclass(frozen=True)
class Usage:
    tokens_in: int = 0
    tokens_out: int = 0
    cost_usd: float = 0.0


@dataclass(frozen=True)
class ProviderResponse:
    """Exactly one of ``text`` / ``image`` is populated, depending on call kind."""

    text: str | None = None
    image: bytes | None = None
    usage: Usage = Usage()
    latency_s: float = 0.0

    def __post_init__(self):
        if (self.text is None) == (self.image is None):
            raise RequestValidationError("response must carry exactly one of text/image")


@dataclass(frozen=True)
class CostRecord:
    timestamp: float
    kind: str  # "chat" | "image"
    tokens_in: int
    tokens_out: int
    cost_usd: float


class CostLedger:
    """Append-only per-call cost log. Safe to share across worker threads."""

    def __init__(self):
        self._lock = threading.Lock()
        self._records: list[CostRecord] = []

    def add(self, kind: str, usage: Usage) -> None:
        rec = CostRecord(
            timestamp=time.time(),
            kind=kind,
            tokens_in=usage.tokens_in,
            tokens_out=usage.tokens_out,
            cost_usd=usage.cost_usd,
        )
        with self._lock:
            self._records.append(rec)

    @property
    def records(self) -> list[CostRecord]:
        with self._lock:
            return list(self._records)

    @property
    def total_usd(self) -> float:
        with self._lock:
            return sum(r.cost_usd for r in self._records)

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)
