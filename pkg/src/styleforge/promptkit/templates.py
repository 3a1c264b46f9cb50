"""Prompt templates: loading, placeholder binding, and rendering.

Templates live in external YAML files (the copies shipped with the
package are the defaults; point ``load_templates`` at another directory
to tune them). Each file declares the template's system text, a user
text with named ``{placeholder}`` slots, and which images accompany the
turn, in order. Rendering is a pure function: the same template,
bindings, and attachments always produce byte-identical requests.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

import yaml

from ..errors import ConfigError, RequestValidationError
from ..provider.types import ChatRequest, ImagePart, SamplingParams, TextPart, Turn

_NUMBER_WORDS = {
    1: "one", 2: "two", 3: "three", 4: "four", 5: "five",
    6: "six", 7: "seven", 8: "eight", 9: "nine", 10: "ten",
}


def count_word(n: int) -> str:
    """English word for small counts, digits beyond ten."""
    return _NUMBER_WORDS.get(n, str(n))


class TemplateId(Enum):
    IMAGE_DECOMPOSE = "image_decompose"
    STYLE_INJECT = "style_inject"
    IMAGE_VERIFY = "image_verify"
    CAPTION_PARAPHRASE = "caption_paraphrase"
    ANSWER_VERIFY = "answer_verify"
    ANSWER_REANNOTATE = "answer_reannotate"
    QUESTION_PARAPHRASE = "question_paraphrase"
    LABEL_VERIFY = "label_verify"
    LABEL_REANNOTATE = "label_reannotate"
    HYPOTHESIS_PARAPHRASE = "hypothesis_paraphrase"


#: image slots each template's user turn must carry, in order
ATTACHMENT_SLOTS = {
    TemplateId.IMAGE_DECOMPOSE: ("original",),
    TemplateId.STYLE_INJECT: (),
    TemplateId.IMAGE_VERIFY: ("original", "candidate"),
    TemplateId.CAPTION_PARAPHRASE: ("stylized",),
    TemplateId.ANSWER_VERIFY: ("stylized",),
    TemplateId.ANSWER_REANNOTATE: ("stylized",),
    TemplateId.QUESTION_PARAPHRASE: (),
    TemplateId.LABEL_VERIFY: ("stylized",),
    TemplateId.LABEL_REANNOTATE: ("stylized",),
    TemplateId.HYPOTHESIS_PARAPHRASE: (),
}


@dataclass(frozen=True)
class PromptTemplate:
    id: TemplateId
    system_text: str
    user_template: str
    attachment_slots: tuple[str, ...]

    def placeholders(self) -> set[str]:
        return {
            field
            for _, field, _, _ in string.Formatter().parse(self.user_template)
            if field
        }


def load_templates(directory: str | Path | None = None) -> dict[TemplateId, PromptTemplate]:
    """Load all ten templates from a directory (package defaults when None)."""
    if directory is None:
        directory = resources.files("styleforge.promptkit") / "templates"
    else:
        directory = Path(directory)
    templates: dict[TemplateId, PromptTemplate] = {}
    for tid in TemplateId:
        path = directory / f"{tid.value}.yaml"
        try:
            doc = yaml.safe_load(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"missing template file {path}") from None
        if doc.get("id") != tid.value:
            raise ConfigError(f"{path} declares id {doc.get('id')!r}, expected {tid.value!r}")
        slots = tuple(doc.get("attachments") or ())
        if slots != ATTACHMENT_SLOTS[tid]:
            raise ConfigError(
                f"{path} declares attachments {slots}, expected {ATTACHMENT_SLOTS[tid]}"
            )
        templates[tid] = PromptTemplate(
            id=tid,
            system_text=doc["system_text"].strip(),
            user_template=doc["user_template"].strip(),
            attachment_slots=slots,
        )
    return templates


def render_turn(
    template: PromptTemplate,
    bindings: dict[str, str] | None = None,
    images: dict[str, bytes] | None = None,
) -> Turn:
    """Fill a template into a single user turn with its attachments."""
    bindings = bindings or {}
    images = images or {}
    missing = template.placeholders() - set(bindings)
    if missing:
        raise RequestValidationError(
            f"template {template.id.value}: unbound placeholders {sorted(missing)}"
        )
    text = template.user_template.format(**bindings)
    parts: list = [TextPart(text)]
    for slot in template.attachment_slots:
        if slot not in images:
            raise RequestValidationError(
                f"template {template.id.value}: missing image attachment {slot!r}"
            )
        parts.append(ImagePart.from_bytes(images[slot]))
    extra = set(images) - set(template.attachment_slots)
    if extra:
        raise RequestValidationError(
            f"template {template.id.value}: unexpected attachments {sorted(extra)}"
        )
    return Turn(role="user", parts=tuple(parts))


def render(
    template: PromptTemplate,
    bindings: dict[str, str] | None = None,
    images: dict[str, bytes] | None = None,
    *,
    sampling: SamplingParams,
) -> ChatRequest:
    """Fill a template into a standalone one-turn chat request."""
    turn = render_turn(template, bindings, images)
    req = ChatRequest(
        system_prompt=template.system_text, turns=(turn,), sampling=sampling
    )
    req.validate()
    return req
