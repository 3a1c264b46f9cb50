from .parsers import (
    VeLabel,
    VerdictKind,
    VerificationVerdict,
    leading_token,
    parse_caption_list,
    parse_prefixed,
    parse_ve_label,
    parse_verdict,
    parse_yes_no,
)
from .styles import Style
from .templates import (
    ATTACHMENT_SLOTS,
    PromptTemplate,
    TemplateId,
    count_word,
    load_templates,
    render,
    render_turn,
)

__all__ = [
    "ATTACHMENT_SLOTS",
    "PromptTemplate",
    "Style",
    "TemplateId",
    "VeLabel",
    "VerdictKind",
    "VerificationVerdict",
    "count_word",
    "leading_token",
    "load_templates",
    "parse_caption_list",
    "parse_prefixed",
    "parse_ve_label",
    "parse_verdict",
    "parse_yes_no",
    "render",
    "render_turn",
]
