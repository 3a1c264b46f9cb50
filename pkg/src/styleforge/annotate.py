"""Task-specific label annotation for stylized images.

Captioning paraphrases the original captions against the stylized image
in one call. VQA and visual entailment verify each original label
against the stylized image first: a confirmed label is kept, a rejected
one is re-annotated by the model; the question or hypothesis is always
paraphrased once so no text is duplicated across style domains. Each
question/hypothesis pair has its own patience budget; an exhausted pair
is dropped without sinking the whole image record.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import SourceItem, Task, VePair, VqaPair
from .errors import ParseError, ProviderError, RequestValidationError
from .promptkit.parsers import (
    VeLabel,
    VerdictKind,
    VerificationVerdict,
    parse_caption_list,
    parse_prefixed,
    parse_ve_label,
    parse_verdict,
    parse_yes_no,
)
from .promptkit.styles import Style
from .promptkit.templates import PromptTemplate, TemplateId, count_word, render_turn
from .provider.base import Provider
from .stylize import ChatSession, PipelineConfig, _Budget, _charges_patience


@dataclass(frozen=True)
class CaptionPayload:
    captions: tuple[str, ...]


@dataclass(frozen=True)
class AnnotatedVqaPair:
    question: str
    answer: str  # "Yes" | "No"
    reused_original_answer: bool


@dataclass(frozen=True)
class AnnotatedVePair:
    hypothesis: str
    label: VeLabel
    reused_original_label: bool


@dataclass(frozen=True)
class VqaPayload:
    pairs: tuple[AnnotatedVqaPair, ...]


@dataclass(frozen=True)
class VePayload:
    pairs: tuple[AnnotatedVePair, ...]


@dataclass(frozen=True)
class DroppedPair:
    index: int
    reason: str
    failures: tuple[str, ...]


def _numbered(lines: tuple[str, ...] | list[str]) -> str:
    return "\n".join(f"{i}. {line}" for i, line in enumerate(lines, start=1))


def annotate_caption(
    session: ChatSession,
    templates: dict[TemplateId, PromptTemplate],
    style: Style,
    stylized: bytes,
    original_captions: tuple[str, ...],
    caption_count: int,
) -> CaptionPayload:
    """One call restyles all original captions together; the reply must
    come back as a numbered list of exactly the same length."""
    if len(original_captions) != caption_count:
        raise RequestValidationError(
            f"expected {caption_count} original captions, got {len(original_captions)}"
        )
    turn = render_turn(
        templates[TemplateId.CAPTION_PARAPHRASE],
        bindings={
            "caption_count": count_word(caption_count),
            "style": style.display_phrase,
            "captions": _numbered(original_captions),
        },
        images={"stylized": stylized},
    )
    def parse(raw: str) -> tuple[str, ...]:
        captions = parse_caption_list(raw, caption_count)
        if any(not c.strip() for c in captions):
            raise ParseError("empty caption in reply")
        return tuple(captions)

    return CaptionPayload(captions=session.ask(turn, parse=parse))


def verify_answer(
    session: ChatSession,
    templates: dict[TemplateId, PromptTemplate],
    style: Style,
    stylized: bytes,
    question: str,
    answer: str,
) -> VerificationVerdict:
    if answer not in ("Yes", "No"):
        raise RequestValidationError(f"answer must be Yes/No, got {answer!r}")
    turn = render_turn(
        templates[TemplateId.ANSWER_VERIFY],
        bindings={"style": style.display_phrase, "question": question, "answer": answer},
        images={"stylized": stylized},
    )
    return session.ask(turn, parse=lambda raw: parse_verdict(raw, VerdictKind.ANSWER_VERIFY))


def reannotate_answer(
    session: ChatSession,
    templates: dict[TemplateId, PromptTemplate],
    style: Style,
    stylized: bytes,
    question: str,
) -> str:
    turn = render_turn(
        templates[TemplateId.ANSWER_REANNOTATE],
        bindings={"style": style.display_phrase, "question": question},
        images={"stylized": stylized},
    )
    return session.ask(turn, parse=parse_yes_no)


def paraphrase_question(
    session: ChatSession,
    templates: dict[TemplateId, PromptTemplate],
    style: Style,
    question: str,
) -> str:
    if not question.strip():
        raise RequestValidationError("empty question")
    turn = render_turn(
        templates[TemplateId.QUESTION_PARAPHRASE],
        bindings={"style": style.display_phrase, "question": question},
    )
    text = session.ask(turn, parse=lambda raw: parse_prefixed(raw, "Paraphrased Question:"))
    # downstream tokenizers expect interrogatives
    return text if text.endswith("?") else text + "?"


def verify_ve_label(
    session: ChatSession,
    templates: dict[TemplateId, PromptTemplate],
    style: Style,
    stylized: bytes,
    hypothesis: str,
    label: VeLabel,
) -> VerificationVerdict:
    if not hypothesis.strip():
        raise RequestValidationError("empty hypothesis")
    turn = render_turn(
        templates[TemplateId.LABEL_VERIFY],
        bindings={
            "style": style.display_phrase,
            "hypothesis": hypothesis,
            "label": label.reply_word,
        },
        images={"stylized": stylized},
    )
    return session.ask(turn, parse=lambda raw: parse_verdict(raw, VerdictKind.LABEL_VERIFY))


def reannotate_ve_label(
    session: ChatSession,
    templates: dict[TemplateId, PromptTemplate],
    style: Style,
    stylized: bytes,
    hypothesis: str,
) -> VeLabel:
    turn = render_turn(
        templates[TemplateId.LABEL_REANNOTATE],
        bindings={"style": style.display_phrase, "hypothesis": hypothesis},
        images={"stylized": stylized},
    )
    return session.ask(turn, parse=parse_ve_label)


def paraphrase_hypothesis(
    session: ChatSession,
    templates: dict[TemplateId, PromptTemplate],
    style: Style,
    hypothesis: str,
) -> str:
    if not hypothesis.strip():
        raise RequestValidationError("empty hypothesis")
    turn = render_turn(
        templates[TemplateId.HYPOTHESIS_PARAPHRASE],
        bindings={"style": style.display_phrase, "hypothesis": hypothesis},
    )
    return session.ask(turn, parse=lambda raw: parse_prefixed(raw, "Paraphrased Hypothesis:"))


def _run_pair(step_fns, budget: _Budget, cfg: PipelineConfig):
    """Drive one pair's verify/reannotate/paraphrase steps under a budget.

    ``step_fns`` yields callables lazily so a later step can depend on an
    earlier result. Returns the list of step results, or None when the
    budget ran out (pair dropped).
    """
    results = []
    steps = list(step_fns)
    i = 0
    while i < len(steps):
        if budget.exhausted:
            return None
        try:
            results.append(steps[i]())
            i += 1
        except (ParseError, ProviderError) as exc:
            if not _charges_patience(exc, cfg):
                raise
            budget.spend(str(exc))
    return results


def annotate_vqa(
    session: ChatSession,
    templates: dict[TemplateId, PromptTemplate],
    style: Style,
    stylized: bytes,
    pairs: tuple[VqaPair, ...],
    cfg: PipelineConfig,
) -> tuple[VqaPayload, list[DroppedPair]]:
    """Verify-or-reannotate every answer, paraphrase every question."""
    annotated: list[AnnotatedVqaPair] = []
    dropped: list[DroppedPair] = []
    for index, pair in enumerate(pairs):
        budget = _Budget(cfg.patience)
        state: dict = {}

        def verify(pair=pair):
            verdict = verify_answer(session, templates, style, stylized,
                                    pair.question, pair.answer)
            state["verdict"] = verdict
            return verdict

        def answer(pair=pair):
            if state["verdict"].value:
                return pair.answer
            return reannotate_answer(session, templates, style, stylized, pair.question)

        def paraphrase(pair=pair):
            return paraphrase_question(session, templates, style, pair.question)

        results = _run_pair([verify, answer, paraphrase], budget, cfg)
        if results is None:
            dropped.append(DroppedPair(index=index, reason="patience exhausted",
                                       failures=tuple(budget.failures)))
            continue
        _, final_answer, question_sty = results
        annotated.append(AnnotatedVqaPair(
            question=question_sty,
            answer=final_answer,
            reused_original_answer=state["verdict"].value,
        ))
    return VqaPayload(pairs=tuple(annotated)), dropped


def annotate_ve(
    session: ChatSession,
    templates: dict[TemplateId, PromptTemplate],
    style: Style,
    stylized: bytes,
    pairs: tuple[VePair, ...],
    cfg: PipelineConfig,
) -> tuple[VePayload, list[DroppedPair]]:
    """Verify-or-reannotate every entailment label, paraphrase every hypothesis."""
    annotated: list[AnnotatedVePair] = []
    dropped: list[DroppedPair] = []
    for index, pair in enumerate(pairs):
        budget = _Budget(cfg.patience)
        state: dict = {}

        def verify(pair=pair):
            verdict = verify_ve_label(session, templates, style, stylized,
                                      pair.hypothesis, pair.label)
            state["verdict"] = verdict
            return verdict

        def label(pair=pair):
            if state["verdict"].value:
                return pair.label
            return reannotate_ve_label(session, templates, style, stylized, pair.hypothesis)

        def paraphrase(pair=pair):
            return paraphrase_hypothesis(session, templates, style, pair.hypothesis)

        results = _run_pair([verify, label, paraphrase], budget, cfg)
        if results is None:
            dropped.append(DroppedPair(index=index, reason="patience exhausted",
                                       failures=tuple(budget.failures)))
            continue
        _, final_label, hypothesis_sty = results
        annotated.append(AnnotatedVePair(
            hypothesis=hypothesis_sty,
            label=final_label,
            reused_original_label=state["verdict"].value,
        ))
    return VePayload(pairs=tuple(annotated)), dropped


def task_system_prompt(task: Task, templates: dict[TemplateId, PromptTemplate]) -> str:
    """The annotator persona for a task, taken from its template files."""
    primary = {
        Task.CAPTION: TemplateId.CAPTION_PARAPHRASE,
        Task.VQA: TemplateId.ANSWER_VERIFY,
        Task.VE: TemplateId.LABEL_VERIFY,
    }[task]
    return templates[primary].system_text


def annotate_item(
    item: SourceItem,
    style: Style,
    stylized: bytes,
    cfg: PipelineConfig,
    provider: Provider,
    templates: dict[TemplateId, PromptTemplate],
):
    """Annotate one stylized image for its task.

    Returns (payload, dropped_pairs); payload is None when nothing
    survived (caption budget exhausted, or every pair dropped).
    """
    session = ChatSession(provider, task_system_prompt(item.task, templates),
                          cfg.sampling, fresh=cfg.fresh_context)
    if item.task is Task.CAPTION:
        budget = _Budget(cfg.patience)
        while not budget.exhausted:
            try:
                payload = annotate_caption(session, templates, style, stylized,
                                           item.captions, cfg.caption_count)
                return payload, []
            except (ParseError, ProviderError) as exc:
                if not _charges_patience(exc, cfg):
                    raise
                budget.spend(str(exc))
        return None, [DroppedPair(index=0, reason="patience exhausted",
                                  failures=tuple(budget.failures))]
    if item.task is Task.VQA:
        payload, dropped = annotate_vqa(session, templates, style, stylized,
                                        item.vqa_pairs, cfg)
        return (payload if payload.pairs else None), dropped
    payload, dropped = annotate_ve(session, templates, style, stylized,
                                   item.ve_pairs, cfg)
    return (payload if payload.pairs else None), dropped
