"""Content-addressed request digests.

A request's digest is the SHA-256 of a canonical JSON serialization of
everything that determines the provider's answer: system prompt, every
turn's text, every image attachment's bytes (folded in as their own
SHA-256 so changing any byte of any part changes the digest), and the
sampling parameters. Digests are stable across runs and processes, which
lets replay sessions be keyed by content instead of call order.
"""

from __future__ import annotations

import hashlib
import json

from .types import ChatRequest, ImageGenRequest, ImagePart, TextPart


def _part_repr(part) -> dict:
    if isinstance(part, TextPart):
        return {"text": part.text}
    if isinstance(part, ImagePart):
        return {
            "image_sha256": hashlib.sha256(part.data).hexdigest(),
            "media_type": part.media_type,
        }
    raise TypeError(f"unknown part type {type(part)!r}")


def _canonical(obj: dict) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode(
        "utf-8"
    )


def chat_digest(req: ChatRequest) -> str:
    doc = {
        "kind": "chat",
        "system": req.system_prompt,
        "turns": [
            {"role": t.role, "parts": [_part_repr(p) for p in t.parts]} for t in req.turns
        ],
        "sampling": {
            "model_id": req.sampling.model_id,
            "temperature": req.sampling.temperature,
            "top_p": req.sampling.top_p,
        },
    }
    return hashlib.sha256(_canonical(doc)).hexdigest()


def image_digest(req: ImageGenRequest) -> str:
    doc = {
        "kind": "image",
        "prompt": req.prompt,
        "size": list(req.size),
        "model_id": req.model_id,
    }
    return hashlib.sha256(_canonical(doc)).hexdigest()
