"""Annotation workflows: keep-or-reannotate branches, paraphrase-always,
per-pair patience, and domain closure."""

import pytest

from styleforge.annotate import (
    CaptionPayload,
    annotate_caption,
    annotate_item,
    annotate_ve,
    annotate_vqa,
    paraphrase_hypothesis,
    paraphrase_question,
    reannotate_ve_label,
    verify_answer,
    verify_ve_label,
)
from styleforge.corpus import SourceItem, Split, Task, VePair, VqaPair
from styleforge.errors import RequestValidationError
from styleforge.promptkit.parsers import VeLabel
from styleforge.promptkit.styles import Style
from styleforge.promptkit.templates import TemplateId, load_templates
from styleforge.stylize import ChatSession, PipelineConfig

from conftest import make_png
from scripted import ItemScript, ScriptedProvider, sha

TEMPLATES = load_templates()
CFG = PipelineConfig(patience=10, image_size=(64, 64))
STYLE = Style.CARTOON_DRAWING
STYLIZED = make_png((40, 80, 40), size=(16, 16))

FIVE_CAPTION_REPLY = "\n".join(
    f"{i}. A cartoon rendition of caption {i}." for i in range(1, 6)
)


def base_script(**kwargs) -> ScriptedProvider:
    script = ItemScript(
        reconstruction_prompt="unused",
        styled_prompt="unused prompt",
        generated_images=[STYLIZED],
        verify_replies=[],
        **kwargs,
    )
    return ScriptedProvider({sha(STYLIZED): script})


def session(provider) -> ChatSession:
    return ChatSession(provider, "You are an annotator.", CFG.sampling)


class TestCaption:
    def test_five_in_five_out(self):
        provider = base_script(caption_replies=[FIVE_CAPTION_REPLY])
        payload = annotate_caption(
            session(provider), TEMPLATES, STYLE, STYLIZED,
            tuple(f"original caption {k}" for k in range(5)), 5,
        )
        assert isinstance(payload, CaptionPayload)
        assert len(payload.captions) == 5
        assert payload.captions[0] == "A cartoon rendition of caption 1."

    def test_wrong_original_count_is_precondition_error(self):
        provider = base_script(caption_replies=[FIVE_CAPTION_REPLY])
        with pytest.raises(RequestValidationError):
            annotate_caption(session(provider), TEMPLATES, STYLE, STYLIZED,
                             ("a", "b", "c", "d"), 5)

    def test_outputs_differ_from_inputs(self):
        provider = base_script(caption_replies=[FIVE_CAPTION_REPLY])
        originals = tuple(f"original caption {k}" for k in range(5))
        payload = annotate_caption(session(provider), TEMPLATES, STYLE,
                                   STYLIZED, originals, 5)
        for out in payload.captions:
            for src in originals:
                assert out != src

    def test_count_word_lands_in_request(self):
        provider = base_script(caption_replies=[FIVE_CAPTION_REPLY])
        sess = session(provider)
        annotate_caption(sess, TEMPLATES, STYLE, STYLIZED,
                         tuple(f"c{k}" for k in range(5)), 5)
        assert "generate five captions" in sess.history[0].text()


class TestVqaOps:
    def test_verify_answer_negative_fixture(self):
        provider = base_script(answer_verify={
            "Is the person wearing a hat?":
                ["No, the question and answer pair is not correct."],
        })
        verdict = verify_answer(session(provider), TEMPLATES, STYLE, STYLIZED,
                                "Is the person wearing a hat?", "Yes")
        assert verdict.value is False

    def test_verify_answer_positive_fixture(self):
        provider = base_script(answer_verify={
            "Is the table set?": ["Yes, the pair is still correct."],
        })
        verdict = verify_answer(session(provider), TEMPLATES, STYLE, STYLIZED,
                                "Is the table set?", "Yes")
        assert verdict.value is True

    def test_non_yes_no_answer_rejected(self):
        with pytest.raises(RequestValidationError):
            verify_answer(session(base_script()), TEMPLATES, STYLE, STYLIZED,
                          "How many cups are on the table?", "two")

    def test_paraphrase_appends_question_mark(self):
        provider = base_script(question_paraphrase={
            "Did he hit that ball?": ["Paraphrased Question: Did he strike the ball"],
        })
        text = paraphrase_question(session(provider), TEMPLATES, STYLE,
                                   "Did he hit that ball?")
        assert text == "Did he strike the ball?"


class TestVqaComposite:
    def script(self):
        return base_script(
            answer_verify={
                "Is the person wearing a hat?":
                    ["No, the question and answer pair is not correct."],
                "Is the person chopping green onions?": ["Yes, still correct."],
            },
            answer_reannotate={
                "Is the person wearing a hat?":
                    ["No, the person in the generated image is not wearing a hat."],
            },
            question_paraphrase={
                "Is the person wearing a hat?":
                    ["Paraphrased Question: Is the individual wearing headgear?"],
                "Is the person chopping green onions?":
                    ["Paraphrased Question: Is the individual slicing green onions?"],
            },
        )

    def test_keep_and_reannotate_branches(self):
        provider = self.script()
        pairs = (
            VqaPair("Is the person wearing a hat?", "Yes"),
            VqaPair("Is the person chopping green onions?", "Yes"),
        )
        payload, dropped = annotate_vqa(session(provider), TEMPLATES, STYLE,
                                        STYLIZED, pairs, CFG)
        assert not dropped
        flipped, kept = payload.pairs
        assert flipped.answer == "No" and flipped.reused_original_answer is False
        assert flipped.question == "Is the individual wearing headgear?"
        assert kept.answer == "Yes" and kept.reused_original_answer is True
        assert kept.question == "Is the individual slicing green onions?"

    def test_answer_domain_closure(self):
        provider = self.script()
        pairs = (VqaPair("Is the person wearing a hat?", "Yes"),)
        payload, _ = annotate_vqa(session(provider), TEMPLATES, STYLE,
                                  STYLIZED, pairs, CFG)
        assert all(p.answer in ("Yes", "No") for p in payload.pairs)

    def test_unparsable_pair_dropped_others_survive(self):
        provider = base_script(
            answer_verify={
                "Could go either way?": ["It depends."],
                "Is grass green?": ["Yes."],
            },
            question_paraphrase={
                "Is grass green?": ["Paraphrased Question: Does the grass look green?"],
            },
        )
        pairs = (VqaPair("Could go either way?", "Yes"), VqaPair("Is grass green?", "Yes"))
        payload, dropped = annotate_vqa(session(provider), TEMPLATES, STYLE,
                                        STYLIZED, pairs, CFG)
        assert len(payload.pairs) == 1
        assert payload.pairs[0].question == "Does the grass look green?"
        assert len(dropped) == 1
        assert dropped[0].index == 0
        assert len(dropped[0].failures) == CFG.patience

    def test_record_conservation(self):
        provider = base_script(
            answer_verify={
                "Could go either way?": ["It depends."],
                "Is grass green?": ["Yes."],
            },
            question_paraphrase={
                "Is grass green?": ["Paraphrased Question: Does the grass look green?"],
            },
        )
        pairs = (VqaPair("Could go either way?", "Yes"), VqaPair("Is grass green?", "Yes"))
        payload, dropped = annotate_vqa(session(provider), TEMPLATES, STYLE,
                                        STYLIZED, pairs, CFG)
        assert len(payload.pairs) + len(dropped) == len(pairs)


class TestVeOps:
    def test_label_verify_negative_fixture(self):
        provider = base_script(label_verify={
            "The person is preparing ingredients for a meal in an outdoor kitchen setup.":
                ["No, the hypothesis is not entailed by the given image."],
        })
        verdict = verify_ve_label(
            session(provider), TEMPLATES, STYLE, STYLIZED,
            "The person is preparing ingredients for a meal in an outdoor kitchen setup.",
            VeLabel.ENTAILMENT,
        )
        assert verdict.value is False

    def test_empty_hypothesis_rejected(self):
        with pytest.raises(RequestValidationError):
            verify_ve_label(session(base_script()), TEMPLATES, STYLE, STYLIZED,
                            "  ", VeLabel.NEUTRAL)

    def test_reannotate_fixture_maps_to_neutral(self):
        provider = base_script(label_reannotate={
            "The person is preparing ingredients for a meal in an outdoor kitchen setup.":
                ["Undetermined. It is unclear in the generated image."],
        })
        label = reannotate_ve_label(
            session(provider), TEMPLATES, STYLE, STYLIZED,
            "The person is preparing ingredients for a meal in an outdoor kitchen setup.",
        )
        assert label is VeLabel.NEUTRAL

    def test_label_word_binding_round_trips(self):
        provider = base_script(label_verify={"Grass is green.": ["Yes."]})
        sess = session(provider)
        verify_ve_label(sess, TEMPLATES, STYLE, STYLIZED, "Grass is green.",
                        VeLabel.NEUTRAL)
        assert "Label: Undetermined" in sess.history[0].text()

    def test_paraphrase_hypothesis_fixture(self):
        provider = base_script(hypothesis_paraphrase={
            "Adults are playing frisbee":
                ["Paraphrased Hypothesis: Grown-ups are tossing a frisbee around."],
        })
        text = paraphrase_hypothesis(session(provider), TEMPLATES, STYLE,
                                     "Adults are playing frisbee")
        assert text == "Grown-ups are tossing a frisbee around."


class TestVeComposite:
    def test_keep_and_reannotate(self):
        provider = base_script(
            label_verify={
                "The person is cooking outdoors.": ["No, that is not entailed."],
                "Adults are playing frisbee": ["Yes, the label is correct."],
            },
            label_reannotate={
                "The person is cooking outdoors.": ["Undetermined. Hard to tell."],
            },
            hypothesis_paraphrase={
                "The person is cooking outdoors.":
                    ["Paraphrased Hypothesis: Someone is preparing food outside."],
                "Adults are playing frisbee":
                    ["Paraphrased Hypothesis: Grown-ups are tossing a frisbee around."],
            },
        )
        pairs = (
            VePair("The person is cooking outdoors.", VeLabel.ENTAILMENT),
            VePair("Adults are playing frisbee", VeLabel.CONTRADICTION),
        )
        payload, dropped = annotate_ve(session(provider), TEMPLATES, STYLE,
                                       STYLIZED, pairs, CFG)
        assert not dropped
        changed, kept = payload.pairs
        assert changed.label is VeLabel.NEUTRAL
        assert changed.reused_original_label is False
        assert changed.hypothesis == "Someone is preparing food outside."
        assert kept.label is VeLabel.CONTRADICTION
        assert kept.reused_original_label is True


class TestAnnotateItem:
    def test_caption_budget_exhaustion_drops_record(self, tmp_path):
        provider = base_script(caption_replies=["not a numbered list"])
        path = tmp_path / "img.png"
        path.write_bytes(make_png((9, 9, 9)))
        item = SourceItem(id="x", task=Task.CAPTION, split=Split.TRAIN,
                          image_path=path, captions=("a", "b", "c", "d", "e"))
        payload, dropped = annotate_item(item, STYLE, STYLIZED, CFG, provider, TEMPLATES)
        assert payload is None
        assert dropped[0].failures and len(dropped[0].failures) == CFG.patience

    def test_zero_surviving_pairs_drops_record(self, tmp_path):
        provider = base_script(answer_verify={"Hmm?": ["It depends."]})
        path = tmp_path / "img.png"
        path.write_bytes(make_png((9, 9, 9)))
        item = SourceItem(id="x", task=Task.VQA, split=Split.TRAIN,
                          image_path=path, vqa_pairs=(VqaPair("Hmm?", "Yes"),))
        payload, dropped = annotate_item(item, STYLE, STYLIZED, CFG, provider, TEMPLATES)
        assert payload is None
        assert len(dropped) == 1
