"""Run configuration: file + environment + flags, in rising precedence.

Config file (YAML or JSON) keys, all optional::

    chat_base_url:  https://api.openai.com/v1
    image_base_url: https://api.openai.com/v1   # defaults to chat_base_url
    chat_model_id:  gpt-4o-2024-05-13
    image_model_id: dall-e-3
    timeout_s: 120
    patience: 10
    caption_count: 5
    image_size: [1024, 1024]
    jobs: 1
    seed: 0
    fresh_context: false
    transport_errors_consume_patience: false
    templates_dir: /path/to/templates
    price_per_1k_tokens_in: 0.0
    price_per_1k_tokens_out: 0.0
    price_per_image: 0.0

Environment: FORGE_API_KEY (never read from file or flags, never echoed),
FORGE_CHAT_BASE_URL, FORGE_IMAGE_BASE_URL.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .provider import HttpProvider, Provider, RecordingProvider, ReplayProvider
from .stylize import PipelineConfig

_FILE_KEYS = {
    "chat_base_url": str,
    "image_base_url": str,
    "chat_model_id": str,
    "image_model_id": str,
    "timeout_s": (int, float),
    "patience": int,
    "caption_count": int,
    "image_size": list,
    "jobs": int,
    "seed": int,
    "fresh_context": bool,
    "transport_errors_consume_patience": bool,
    "templates_dir": str,
    "price_per_1k_tokens_in": (int, float),
    "price_per_1k_tokens_out": (int, float),
    "price_per_image": (int, float),
}


@dataclass
class RunConfig:
    chat_base_url: str = "https://api.openai.com/v1"
    image_base_url: str | None = None
    chat_model_id: str = "gpt-4o-2024-05-13"
    image_model_id: str = "dall-e-3"
    timeout_s: float = 120.0
    patience: int = 10
    caption_count: int = 5
    image_size: tuple[int, int] = (1024, 1024)
    jobs: int = 1
    seed: int = 0
    fresh_context: bool = False
    transport_errors_consume_patience: bool = False
    templates_dir: str | None = None
    price_per_1k_tokens_in: float = 0.0
    price_per_1k_tokens_out: float = 0.0
    price_per_image: float = 0.0
    replay_session: str | None = None
    record_session: str | None = None
    api_key: str = field(default="", repr=False)

    def validate(self) -> None:
        if self.patience < 1:
            raise ConfigError("patience must be >= 1")
        if self.caption_count < 1:
            raise ConfigError("caption_count must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        w, h = self.image_size
        if w <= 0 or h <= 0:
            raise ConfigError("image_size must be positive")
        if self.replay_session and self.record_session:
            raise ConfigError("choose one of replay or record, not both")

    def pipeline(self) -> PipelineConfig:
        return PipelineConfig(
            chat_model_id=self.chat_model_id,
            image_model_id=self.image_model_id,
            patience=self.patience,
            caption_count=self.caption_count,
            image_size=self.image_size,
            fresh_context=self.fresh_context,
            transport_errors_consume_patience=self.transport_errors_consume_patience,
        )

    def make_provider(self) -> Provider:
        if self.replay_session:
            return ReplayProvider(self.replay_session)
        live = HttpProvider(
            chat_base_url=self.chat_base_url,
            image_base_url=self.image_base_url,
            api_key=self.api_key,
            timeout_s=self.timeout_s,
            price_per_1k_tokens_in=self.price_per_1k_tokens_in,
            price_per_1k_tokens_out=self.price_per_1k_tokens_out,
            price_per_image=self.price_per_image,
        )
        if self.record_session:
            return RecordingProvider(live, self.record_session)
        return live

    def snapshot(self) -> dict:
        """Loggable view of the configuration; secrets are dropped."""
        doc = asdict(self)
        doc.pop("api_key", None)
        doc["image_size"] = list(self.image_size)
        return doc


def load_config(path: str | Path | None = None, *, env: dict | None = None,
                overrides: dict | None = None) -> RunConfig:
    """Merge config sources; flags beat environment beats file beats defaults."""
    env = os.environ if env is None else env
    cfg = RunConfig()

    if path is not None:
        doc = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        if not isinstance(doc, dict):
            raise ConfigError(f"config file {path} must hold a mapping")
        for key, value in doc.items():
            if key not in _FILE_KEYS:
                raise ConfigError(f"unknown config key {key!r} in {path}")
            if not isinstance(value, _FILE_KEYS[key]) or isinstance(value, bool) != (
                _FILE_KEYS[key] is bool
            ):
                raise ConfigError(f"config key {key!r} has wrong type")
            if key == "image_size":
                if len(value) != 2:
                    raise ConfigError("image_size must be [width, height]")
                value = (int(value[0]), int(value[1]))
            setattr(cfg, key, value)

    if env.get("FORGE_CHAT_BASE_URL"):
        cfg.chat_base_url = env["FORGE_CHAT_BASE_URL"]
    if env.get("FORGE_IMAGE_BASE_URL"):
        cfg.image_base_url = env["FORGE_IMAGE_BASE_URL"]
    cfg.api_key = env.get("FORGE_API_KEY", "")

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if not hasattr(cfg, key):
            raise ConfigError(f"unknown config override {key!r}")
        setattr(cfg, key, value)

    cfg.validate()
    return cfg
