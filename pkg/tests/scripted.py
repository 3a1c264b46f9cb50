"""A scripted stand-in for the live provider.

Classifies each request by the template text of its last user turn and
answers from per-item scripts, so pipeline tests (and the generator for
the shipped replay fixtures) can steer every branch: pass, fail then
pass, unparsable replies, and patience exhaustion. Items are recognized
by the bytes of their attached images; image-free calls (the question
and hypothesis paraphrases) are recognized by the embedded text.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from styleforge.provider.base import Provider
from styleforge.provider.types import ImagePart, ProviderResponse, Usage


def sha(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass
class ItemScript:
    """Replies for one (item, style) unit; queues are consumed in order
    and the final entry sticks so resumed runs see stable behavior."""

    reconstruction_prompt: str
    styled_prompt: str
    generated_images: list[bytes]
    verify_replies: list[str]
    decompose_replies: list[str] = field(default_factory=list)
    inject_replies: list[str] = field(default_factory=list)
    caption_replies: list[str] = field(default_factory=list)
    answer_verify: dict[str, list[str]] = field(default_factory=dict)
    answer_reannotate: dict[str, list[str]] = field(default_factory=dict)
    question_paraphrase: dict[str, list[str]] = field(default_factory=dict)
    label_verify: dict[str, list[str]] = field(default_factory=dict)
    label_reannotate: dict[str, list[str]] = field(default_factory=dict)
    hypothesis_paraphrase: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.decompose_replies:
            self.decompose_replies = [self.reconstruction_prompt]
        if not self.inject_replies:
            self.inject_replies = [self.styled_prompt]


def _pop(queue: list):
    if not queue:
        raise AssertionError("script queue exhausted")
    return queue.pop(0) if len(queue) > 1 else queue[0]


def _line_after(text: str, prefix: str) -> str:
    for line in text.splitlines():
        if line.startswith(prefix):
            return line[len(prefix):].strip()
    raise AssertionError(f"no {prefix!r} line in request text:\n{text}")


class ScriptedProvider(Provider):
    def __init__(self, scripts_by_image: dict[str, ItemScript]):
        super().__init__()
        self.scripts = dict(scripts_by_image)  # sha256 of any item image -> script
        for script in scripts_by_image.values():
            for image in script.generated_images:
                self.scripts[sha(image)] = script
        self.text_index: dict[str, ItemScript] = {}
        for script in scripts_by_image.values():
            self.text_index[script.reconstruction_prompt] = script
            for question in list(script.question_paraphrase) + list(script.answer_verify):
                self.text_index[question] = script
            for hyp in list(script.hypothesis_paraphrase) + list(script.label_verify):
                self.text_index[hyp] = script
        self.by_prompt = {s.styled_prompt: s for s in scripts_by_image.values()}

    def _script_for(self, req) -> ItemScript:
        for turn in req.turns:
            for part in turn.parts:
                if isinstance(part, ImagePart):
                    script = self.scripts.get(sha(part.data))
                    if script:
                        return script
        text = req.turns[-1].text()
        for key, script in self.text_index.items():
            if key in text:
                return script
        raise AssertionError(f"no script matches request:\n{text[:200]}")

    def chat(self, req):
        req.validate()
        script = self._script_for(req)
        text = req.turns[-1].text()
        if text.startswith("Please generate a detailed prompt"):
            reply = _pop(script.decompose_replies)
        elif text.startswith("Please modify the generated prompt"):
            reply = _pop(script.inject_replies)
        elif text.startswith("Please verify if the image below"):
            reply = _pop(script.verify_replies)
        elif text.startswith("Please generate") and "captions of the generated" in text:
            reply = _pop(script.caption_replies)
        elif text.startswith("Please verify if the question and answer pair"):
            reply = _pop(script.answer_verify[_line_after(text, "Question: ")])
        elif text.startswith("Please answer the question below"):
            reply = _pop(script.answer_reannotate[_line_after(text, "Question: ")])
        elif text.startswith("Please paraphrase the question below"):
            reply = _pop(script.question_paraphrase[_line_after(text, "Question: ")])
        elif text.startswith("Please verify if given hypothesis pair"):
            reply = _pop(script.label_verify[_line_after(text, "Hypothesis: ")])
        elif text.startswith("Does the given hypothesis entail"):
            reply = _pop(script.label_reannotate[_line_after(text, "Hypothesis: ")])
        elif text.startswith("Please paraphrase the hypothesis sentence"):
            reply = _pop(script.hypothesis_paraphrase[_line_after(text, "Hypothesis: ")])
        else:
            raise AssertionError(f"unrecognized request text:\n{text[:200]}")
        resp = ProviderResponse(text=reply, usage=Usage(tokens_in=10, tokens_out=20))
        self.ledger.add("chat", resp.usage)
        return resp

    def generate_image(self, req):
        req.validate()
        script = self.by_prompt.get(req.prompt)
        if script is None:
            raise AssertionError(f"no script for image prompt {req.prompt[:80]!r}")
        resp = ProviderResponse(image=_pop(script.generated_images), usage=Usage(cost_usd=0.02))
        self.ledger.add("image", resp.usage)
        return resp
