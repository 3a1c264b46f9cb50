"""Stylized image production: describe, restyle, generate, verify.

Each (item, style) unit runs a strictly sequential state machine:

1. ask the chat model for a reconstruction prompt of the original image,
2. ask it to rewrite that prompt in the target style,
3. generate a candidate image from the restyled prompt,
4. show the model both images and ask whether the candidate keeps the
   original's essential content; regenerate the image (same restyled
   prompt) until it does.

All semantic failures (unparsable replies, refusals, safety rejections,
and "No" verdicts) draw from one shared patience budget per unit; when
the budget is gone the unit is omitted with its full attempt log instead
of being emitted. The reconstruction and restyled prompts are computed
once per unit and reused across regeneration attempts.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

from PIL import Image

from .corpus import SourceItem
from .errors import ParseError, ProviderError, RequestValidationError, TransportError
from .promptkit.parsers import VerdictKind, VerificationVerdict, parse_verdict
from .promptkit.styles import Style
from .promptkit.templates import PromptTemplate, TemplateId, render_turn
from .provider.base import Provider
from .provider.types import (
    ChatRequest,
    ImageGenRequest,
    SamplingParams,
    TextPart,
    Turn,
    sniff_media_type,
)


@dataclass
class PipelineConfig:
    """Knobs shared by the stylize and annotate stages."""

    chat_model_id: str = "gpt-4o-2024-05-13"
    image_model_id: str = "dall-e-3"
    patience: int = 10
    caption_count: int = 5
    image_size: tuple[int, int] = (1024, 1024)
    temperature: float | None = None
    top_p: float | None = None
    fresh_context: bool = False
    transport_errors_consume_patience: bool = False

    def __post_init__(self):
        if self.patience < 1:
            raise RequestValidationError("patience must be >= 1")
        if self.caption_count < 1:
            raise RequestValidationError("caption_count must be >= 1")

    @property
    def sampling(self) -> SamplingParams:
        return SamplingParams(
            model_id=self.chat_model_id, temperature=self.temperature, top_p=self.top_p
        )


@dataclass(frozen=True)
class StylizedImage:
    source_id: str
    style: Style
    image: bytes
    reconstruction_prompt: str
    styled_prompt: str
    attempts: int
    verdict_log: tuple[VerificationVerdict, ...]


@dataclass(frozen=True)
class Omitted:
    source_id: str
    style: Style
    stage: str
    attempts: int
    failures: tuple[str, ...]


class ChatSession:
    """One running conversation with the chat model.

    In persistent mode every accepted exchange is appended, so later
    requests carry the full transcript. An exchange is committed only
    when the reply also parses: failed calls and unparsable replies never
    mutate the history, which keeps retried requests byte-identical (and
    therefore replayable by digest). Fresh mode keeps no history at all.
    """

    def __init__(self, provider: Provider, system_prompt: str,
                 sampling: SamplingParams, *, fresh: bool = False):
        self.provider = provider
        self.system_prompt = system_prompt
        self.sampling = sampling
        self.fresh = fresh
        self.history: tuple[Turn, ...] = ()

    def ask(self, turn: Turn, parse=None):
        """Send one user turn; return the reply, run through ``parse`` if given."""
        req = ChatRequest(
            system_prompt=self.system_prompt,
            turns=self.history + (turn,),
            sampling=self.sampling,
        )
        resp = self.provider.chat(req)
        text = resp.text or ""
        result = parse(text) if parse is not None else text
        if not self.fresh:
            self.history = self.history + (turn, Turn(role="assistant", parts=(TextPart(text),)))
        return result


def _with_context(turn: Turn, context: str, *, fresh: bool) -> Turn:
    """In fresh mode a follow-up turn must carry its context inline."""
    if not fresh or not context:
        return turn
    head = turn.parts[0]
    assert isinstance(head, TextPart)
    return Turn(role=turn.role, parts=(TextPart(head.text + "\n" + context),) + turn.parts[1:])


def _nonempty(raw: str) -> str:
    text = raw.strip()
    if not text:
        raise ParseError("empty reply where a prompt was expected")
    return text


def decompose(session: ChatSession, template: PromptTemplate, original: bytes) -> str:
    """Ask the model for a prompt that would reconstruct the original image."""
    sniff_media_type(original)  # precondition: image decodes
    turn = render_turn(template, images={"original": original})
    return session.ask(turn, parse=_nonempty)


def inject_style(session: ChatSession, template: PromptTemplate, style: Style,
                 reconstruction_prompt: str) -> str:
    """Rewrite the reconstruction prompt to carry the target style."""
    if style is Style.REAL_PHOTO:
        raise RequestValidationError("real photo is never a stylization target")
    turn = render_turn(template, bindings={"style": style.display_phrase})
    turn = _with_context(turn, f"Prompt: {reconstruction_prompt}", fresh=session.fresh)
    return session.ask(turn, parse=_nonempty)


def verify_image(session: ChatSession, template: PromptTemplate, style: Style,
                 original: bytes, candidate: bytes) -> VerificationVerdict:
    """Ask the model whether the candidate keeps the original's content."""
    sniff_media_type(original)
    sniff_media_type(candidate)
    turn = render_turn(
        template,
        bindings={"style": style.display_phrase},
        images={"original": original, "candidate": candidate},
    )
    return session.ask(turn, parse=lambda raw: parse_verdict(raw, VerdictKind.IMAGE_VERIFY))


def _ensure_png(data: bytes) -> bytes:
    if sniff_media_type(data) == "image/png":
        return data
    with Image.open(io.BytesIO(data)) as im:
        buf = io.BytesIO()
        im.save(buf, format="PNG")
        return buf.getvalue()


def _charges_patience(exc: Exception, cfg: PipelineConfig) -> bool:
    """Whether a failure draws from the patience budget or aborts the unit."""
    if isinstance(exc, TransportError):
        return cfg.transport_errors_consume_patience
    return getattr(exc, "consumes_patience", False)


@dataclass
class _Budget:
    limit: int
    failures: list[str] = field(default_factory=list)

    def spend(self, reason: str) -> None:
        self.failures.append(reason)

    @property
    def exhausted(self) -> bool:
        return len(self.failures) >= self.limit


def stylize_item(
    item: SourceItem,
    style: Style,
    cfg: PipelineConfig,
    provider: Provider,
    templates: dict[TemplateId, PromptTemplate],
    *,
    system_prompt: str | None = None,
) -> StylizedImage | Omitted:
    """Run the full state machine for one (item, style) unit.

    Semantic failures never escape: they fold into the patience budget
    and, once it is exhausted, into an ``Omitted`` marker. Transport
    failures that survive the provider's internal retries abort the run
    (the unit stays pending and is picked up on resume) unless configured
    to count against patience.
    """
    original = item.read_image()
    if system_prompt is None:
        system_prompt = templates[TemplateId.IMAGE_DECOMPOSE].system_text
    session = ChatSession(provider, system_prompt, cfg.sampling, fresh=cfg.fresh_context)
    budget = _Budget(cfg.patience)
    reconstruction: str | None = None
    styled: str | None = None
    verdicts: list[VerificationVerdict] = []
    attempts = 0
    stage = "decompose"

    while not budget.exhausted:
        try:
            if reconstruction is None:
                stage = "decompose"
                reconstruction = decompose(
                    session, templates[TemplateId.IMAGE_DECOMPOSE], original
                )
                continue
            if styled is None:
                stage = "inject_style"
                styled = inject_style(
                    session, templates[TemplateId.STYLE_INJECT], style, reconstruction
                )
                continue
            stage = "generate"
            gen = provider.generate_image(
                ImageGenRequest(prompt=styled, size=cfg.image_size,
                                model_id=cfg.image_model_id)
            )
            stage = "verify"
            attempts += 1
            verdict = verify_image(
                session, templates[TemplateId.IMAGE_VERIFY], style, original, gen.image
            )
            verdicts.append(verdict)
            if verdict.value:
                return StylizedImage(
                    source_id=item.id,
                    style=style,
                    image=_ensure_png(gen.image),
                    reconstruction_prompt=reconstruction,
                    styled_prompt=styled,
                    attempts=attempts,
                    verdict_log=tuple(verdicts),
                )
            budget.spend(f"{stage}: verification returned no")
        except (ParseError, ProviderError) as exc:
            if not _charges_patience(exc, cfg):
                raise
            budget.spend(f"{stage}: {exc}")

    return Omitted(
        source_id=item.id,
        style=style,
        stage=stage,
        attempts=attempts,
        failures=tuple(budget.failures),
    )
