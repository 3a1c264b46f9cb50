from .base import Provider, Transcript, TranscriptEntry
from .digest import chat_digest, image_digest
from .http import HttpProvider
from .replay import RecordingProvider, ReplayProvider
from .types import (
    ChatRequest,
    CostLedger,
    CostRecord,
    ImageGenRequest,
    ImagePart,
    ProviderResponse,
    SamplingParams,
    TextPart,
    Turn,
    Usage,
    sniff_media_type,
)

__all__ = [
    "ChatRequest",
    "CostLedger",
    "CostRecord",
    "HttpProvider",
    "ImageGenRequest",
    "ImagePart",
    "Provider",
    "ProviderResponse",
    "RecordingProvider",
    "ReplayProvider",
    "SamplingParams",
    "TextPart",
    "Transcript",
    "TranscriptEntry",
    "Turn",
    "Usage",
    "chat_digest",
    "image_digest",
    "sniff_media_type",
]
