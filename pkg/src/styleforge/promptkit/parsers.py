"""Strict parsers for the constrained reply formats the templates ask for.

Replies are free text but must open with a committed token ("Yes"/"No",
"True"/"False"/"Undetermined") or carry a labelled payload ("Paraphrased
Question: ...", a numbered caption list). Parsing looks only at that
leading structure, so appending explanations never changes the outcome.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from ..errors import ParseError

_LEADING_TOKEN = re.compile(r"[^A-Za-z]*([A-Za-z]+)")
_NUMBERED_LINE = re.compile(r"^\s*(\d+)[.)]\s*(.+?)\s*$")


class VerdictKind(Enum):
    IMAGE_VERIFY = "image_verify"
    ANSWER_VERIFY = "answer_verify"
    LABEL_VERIFY = "label_verify"


@dataclass(frozen=True)
class VerificationVerdict:
    kind: VerdictKind
    value: bool
    raw_response: str


class VeLabel(Enum):
    """Visual-entailment labels, bijective with the reply words
    True / Undetermined / False."""

    ENTAILMENT = "entailment"
    NEUTRAL = "neutral"
    CONTRADICTION = "contradiction"

    @property
    def reply_word(self) -> str:
        return _LABEL_TO_WORD[self]

    @classmethod
    def from_reply_word(cls, word: str) -> "VeLabel":
        try:
            return _WORD_TO_LABEL[word.casefold()]
        except KeyError:
            raise ParseError(f"not an entailment reply word: {word!r}") from None


_LABEL_TO_WORD = {
    VeLabel.ENTAILMENT: "True",
    VeLabel.NEUTRAL: "Undetermined",
    VeLabel.CONTRADICTION: "False",
}
_WORD_TO_LABEL = {w.casefold(): l for l, w in _LABEL_TO_WORD.items()}


def leading_token(raw: str) -> str:
    """First alphabetic token of a reply, case preserved."""
    m = _LEADING_TOKEN.match(raw)
    if not m:
        raise ParseError(f"no alphabetic leading token in {raw[:60]!r}")
    return m.group(1)


def parse_verdict(raw: str, kind: VerdictKind) -> VerificationVerdict:
    """Yes/No verdict from the leading token; anything else is a parse error."""
    if not raw:
        raise ParseError("empty verdict reply")
    token = leading_token(raw).casefold()
    if token == "yes":
        return VerificationVerdict(kind=kind, value=True, raw_response=raw)
    if token == "no":
        return VerificationVerdict(kind=kind, value=False, raw_response=raw)
    raise ParseError(f"verdict reply starts with {token!r}, expected yes/no")


def parse_yes_no(raw: str) -> str:
    """Leading Yes/No as a canonical answer word."""
    token = leading_token(raw).casefold()
    if token in ("yes", "no"):
        return token.capitalize()
    raise ParseError(f"answer reply starts with {token!r}, expected yes/no")


def parse_ve_label(raw: str) -> VeLabel:
    if not raw:
        raise ParseError("empty label reply")
    return VeLabel.from_reply_word(leading_token(raw))


def parse_prefixed(raw: str, prefix: str) -> str:
    """Text after the first occurrence of ``prefix``; the whole reply if absent."""
    idx = raw.find(prefix)
    text = raw[idx + len(prefix):] if idx >= 0 else raw
    text = text.strip()
    if not text:
        raise ParseError(f"nothing after prefix {prefix!r}")
    return text


def parse_caption_list(raw: str, expected_n: int) -> list[str]:
    """Exactly ``expected_n`` numbered lines ("1. ...", "2. ..."), in order."""
    if expected_n < 1:
        raise ValueError("expected_n must be >= 1")
    found: list[tuple[int, str]] = []
    for line in raw.splitlines():
        m = _NUMBERED_LINE.match(line)
        if m:
            found.append((int(m.group(1)), m.group(2)))
    if len(found) != expected_n:
        raise ParseError(
            f"expected {expected_n} numbered caption lines, found {len(found)}"
        )
    for pos, (ordinal, _) in enumerate(found, start=1):
        if ordinal != pos:
            raise ParseError(f"caption ordinals out of sequence: got {ordinal} at position {pos}")
    return [text for _, text in found]
