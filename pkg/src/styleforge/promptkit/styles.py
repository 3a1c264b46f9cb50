"""Image style domains."""

from __future__ import annotations

from enum import Enum


class Style(Enum):
    """The four image style domains a dataset can carry.

    ``REAL_PHOTO`` denotes untouched source data and is never a target of
    stylization; the other three are produced by the pipeline.
    """

    REAL_PHOTO = ("real", "real photo style")
    CARTOON_DRAWING = ("cartoon", "cartoon drawing style")
    PENCIL_DRAWING = ("pencil", "pencil drawing style")
    OIL_PAINTING = ("oil", "oil painting style")

    def __init__(self, slug: str, display_phrase: str):
        self.slug = slug
        self.display_phrase = display_phrase

    @classmethod
    def from_slug(cls, slug: str) -> "Style":
        for style in cls:
            if style.slug == slug:
                return style
        raise ValueError(f"unknown style {slug!r}; expected one of "
                         f"{[s.slug for s in cls]}")

    @classmethod
    def targets(cls) -> tuple["Style", ...]:
        """Styles that stylization may produce (everything but real)."""
        return (cls.CARTOON_DRAWING, cls.PENCIL_DRAWING, cls.OIL_PAINTING)
