"""Live provider speaking JSON-over-HTTPS in the chat-completions shape.

Images travel inline as base64 data URLs; image generation goes to a
separate endpoint. Base URLs and model ids come from configuration, so
any service exposing this wire shape works. Transport failures and rate
limits are retried internally with exponential backoff and never reach
the annotation layer; semantic failures (refusals, malformed bodies,
safety rejections) are raised for the caller to charge against patience.
"""

from __future__ import annotations

import base64
import time

import httpx

from ..errors import (
    ContentRefusalError,
    EmptyResponseError,
    MalformedResponseError,
    RateLimitError,
    SafetyRejectionError,
    TransportError,
)
from .base import Provider, TranscriptEntry, summarize_chat
from .digest import chat_digest, image_digest
from .types import (
    ChatRequest,
    ImageGenRequest,
    ImagePart,
    ProviderResponse,
    TextPart,
    Usage,
)


def _data_url(part: ImagePart) -> str:
    return f"data:{part.media_type};base64,{base64.b64encode(part.data).decode('ascii')}"


def _turn_payload(turn) -> dict:
    content = []
    for part in turn.parts:
        if isinstance(part, TextPart):
            content.append({"type": "text", "text": part.text})
        else:
            content.append({"type": "image_url", "image_url": {"url": _data_url(part)}})
    return {"role": turn.role, "content": content}


class HttpProvider(Provider):
    def __init__(
        self,
        *,
        chat_base_url: str,
        image_base_url: str | None = None,
        api_key: str = "",
        timeout_s: float = 120.0,
        max_transport_retries: int = 5,
        backoff_base_s: float = 1.0,
        price_per_1k_tokens_in: float = 0.0,
        price_per_1k_tokens_out: float = 0.0,
        price_per_image: float = 0.0,
        sleep=time.sleep,
        transport: httpx.BaseTransport | None = None,
    ):
        super().__init__()
        self.chat_base_url = chat_base_url.rstrip("/")
        self.image_base_url = (image_base_url or chat_base_url).rstrip("/")
        self.api_key = api_key
        self.max_transport_retries = max_transport_retries
        self.backoff_base_s = backoff_base_s
        self.price_in = price_per_1k_tokens_in
        self.price_out = price_per_1k_tokens_out
        self.price_image = price_per_image
        self._sleep = sleep
        self._client = httpx.Client(timeout=timeout_s, transport=transport)

    def close(self) -> None:
        self._client.close()

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def _post(self, url: str, payload: dict) -> dict:
        """POST with retry/backoff on transport errors and rate limits."""
        last_exc: Exception | None = None
        for attempt in range(self.max_transport_retries + 1):
            if attempt:
                self._sleep(self.backoff_base_s * (2 ** (attempt - 1)))
            try:
                resp = self._client.post(url, json=payload, headers=self._headers())
            except httpx.HTTPError as exc:
                last_exc = TransportError(f"transport failure calling {url}: {exc}")
                continue
            if resp.status_code == 429:
                last_exc = RateLimitError(f"rate limited by {url}")
                continue
            if resp.status_code >= 500:
                last_exc = TransportError(f"{url} returned {resp.status_code}")
                continue
            if resp.status_code == 400:
                body = resp.text
                if "content_policy" in body or "safety" in body:
                    raise SafetyRejectionError(f"{url} rejected the request: {body[:200]}")
                raise MalformedResponseError(f"{url} rejected the request: {body[:200]}")
            if resp.status_code != 200:
                raise TransportError(f"{url} returned {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()
            except ValueError as exc:
                raise MalformedResponseError(f"{url} returned non-JSON body") from exc
        assert last_exc is not None
        raise last_exc

    def chat(self, req: ChatRequest) -> ProviderResponse:
        req.validate()
        digest = chat_digest(req)
        payload: dict = {
            "model": req.sampling.model_id,
            "messages": [{"role": "system", "content": req.system_prompt}]
            + [_turn_payload(t) for t in req.turns],
        }
        if req.sampling.temperature is not None:
            payload["temperature"] = req.sampling.temperature
        if req.sampling.top_p is not None:
            payload["top_p"] = req.sampling.top_p

        start = time.monotonic()
        body = self._post(f"{self.chat_base_url}/chat/completions", payload)
        latency = time.monotonic() - start

        try:
            choice = body["choices"][0]
            text = choice["message"]["content"]
            finish = choice.get("finish_reason")
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError(f"unexpected chat completion shape: {exc}") from exc
        if finish == "content_filter":
            raise ContentRefusalError("completion stopped by content filter")
        if not text or not text.strip():
            raise EmptyResponseError("empty chat completion")

        usage_doc = body.get("usage") or {}
        tokens_in = int(usage_doc.get("prompt_tokens", 0))
        tokens_out = int(usage_doc.get("completion_tokens", 0))
        usage = Usage(
            tokens_in=tokens_in,
            tokens_out=tokens_out,
            cost_usd=tokens_in / 1000 * self.price_in + tokens_out / 1000 * self.price_out,
        )
        self.ledger.add("chat", usage)
        self.transcript.add(TranscriptEntry("chat", digest, summarize_chat(req)))
        return ProviderResponse(text=text, usage=usage, latency_s=latency)

    def generate_image(self, req: ImageGenRequest) -> ProviderResponse:
        req.validate()
        digest = image_digest(req)
        payload = {
            "model": req.model_id,
            "prompt": req.prompt,
            "size": f"{req.size[0]}x{req.size[1]}",
            "response_format": "b64_json",
            "n": 1,
        }
        start = time.monotonic()
        body = self._post(f"{self.image_base_url}/images/generations", payload)
        latency = time.monotonic() - start

        try:
            b64 = body["data"][0]["b64_json"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError(f"unexpected image generation shape: {exc}") from exc
        try:
            data = base64.b64decode(b64)
        except Exception as exc:
            raise MalformedResponseError("image payload is not valid base64") from exc
        if not data:
            raise EmptyResponseError("empty image payload")

        usage = Usage(cost_usd=self.price_image)
        self.ledger.add("image", usage)
        self.transcript.add(TranscriptEntry("image", digest, req.prompt[:80]))
        return ProviderResponse(image=data, usage=usage, latency_s=latency)
