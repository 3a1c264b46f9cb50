"""Source corpus model: the original records a run starts from.

A corpus manifest is a JSONL file, one record per line, with image paths
relative to the manifest's directory::

    {"id": "cap0001", "task": "cap", "split": "train",
     "image": "images/cap0001.png", "captions": ["...", ...]}
    {"id": "vqa0001", "task": "vqa", "split": "train",
     "image": "images/vqa0001.png",
     "pairs": [{"question": "...?", "answer": "Yes"}, ...]}
    {"id": "ve0001", "task": "ve", "split": "test",
     "image": "images/ve0001.png",
     "pairs": [{"hypothesis": "...", "label": "entailment"}, ...]}
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import SchemaError
from .jsonl import read_jsonl
from .promptkit.parsers import VeLabel


class Task(Enum):
    CAPTION = "cap"
    VQA = "vqa"
    VE = "ve"

    @classmethod
    def from_slug(cls, slug: str) -> "Task":
        for t in cls:
            if t.value == slug:
                return t
        raise SchemaError(f"unknown task {slug!r}")


class Split(Enum):
    TRAIN = "train"
    VALID = "valid"
    TEST = "test"

    @classmethod
    def from_slug(cls, slug: str) -> "Split":
        for s in cls:
            if s.value == slug:
                return s
        raise SchemaError(f"unknown split {slug!r}")


@dataclass(frozen=True)
class VqaPair:
    question: str
    answer: str  # "Yes" | "No"


@dataclass(frozen=True)
class VePair:
    hypothesis: str
    label: VeLabel


@dataclass(frozen=True)
class SourceItem:
    id: str
    task: Task
    split: Split
    image_path: Path  # resolved, absolute
    captions: tuple[str, ...] = ()
    vqa_pairs: tuple[VqaPair, ...] = ()
    ve_pairs: tuple[VePair, ...] = ()

    def read_image(self) -> bytes:
        return self.image_path.read_bytes()


def _parse_item(doc: dict, base_dir: Path) -> SourceItem:
    try:
        item_id = doc["id"]
        task = Task.from_slug(doc["task"])
        split = Split.from_slug(doc["split"])
        image_rel = doc["image"]
    except KeyError as exc:
        raise SchemaError(f"source record missing field {exc}", record_id=doc.get("id")) from None

    captions: tuple[str, ...] = ()
    vqa_pairs: tuple[VqaPair, ...] = ()
    ve_pairs: tuple[VePair, ...] = ()
    if task is Task.CAPTION:
        raw = doc.get("captions")
        if not raw or not all(isinstance(c, str) and c.strip() for c in raw):
            raise SchemaError("caption record needs non-empty captions",
                              record_id=item_id, field="captions")
        captions = tuple(raw)
    elif task is Task.VQA:
        raw = doc.get("pairs")
        if not raw:
            raise SchemaError("vqa record needs pairs", record_id=item_id, field="pairs")
        pairs = []
        for p in raw:
            answer = p.get("answer", "")
            if answer not in ("Yes", "No"):
                raise SchemaError(f"vqa answer must be Yes/No, got {answer!r}",
                                  record_id=item_id, field="pairs.answer")
            if not p.get("question", "").strip():
                raise SchemaError("empty vqa question", record_id=item_id, field="pairs.question")
            pairs.append(VqaPair(question=p["question"], answer=answer))
        vqa_pairs = tuple(pairs)
    else:
        raw = doc.get("pairs")
        if not raw:
            raise SchemaError("ve record needs pairs", record_id=item_id, field="pairs")
        pairs = []
        for p in raw:
            try:
                label = VeLabel(p.get("label", ""))
            except ValueError:
                raise SchemaError(f"ve label must be one of {[l.value for l in VeLabel]}, "
                                  f"got {p.get('label')!r}",
                                  record_id=item_id, field="pairs.label") from None
            if not p.get("hypothesis", "").strip():
                raise SchemaError("empty ve hypothesis", record_id=item_id,
                                  field="pairs.hypothesis")
            pairs.append(VePair(hypothesis=p["hypothesis"], label=label))
        ve_pairs = tuple(pairs)

    return SourceItem(
        id=item_id,
        task=task,
        split=split,
        image_path=(base_dir / image_rel).resolve(),
        captions=captions,
        vqa_pairs=vqa_pairs,
        ve_pairs=ve_pairs,
    )


def read_corpus(manifest_path: str | Path, *, task: Task | None = None,
                check_images: bool = True) -> list[SourceItem]:
    """Load and validate a source manifest, optionally filtered to one task."""
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise SchemaError(f"source manifest not found: {manifest_path}")
    base_dir = manifest_path.parent
    items = [_parse_item(doc, base_dir) for doc in read_jsonl(manifest_path)]
    if task is not None:
        items = [it for it in items if it.task is task]
    seen: set[str] = set()
    for it in items:
        if it.id in seen:
            raise SchemaError("duplicate item id", record_id=it.id, field="id")
        seen.add(it.id)
        if check_images and not it.image_path.is_file():
            raise SchemaError(f"image path does not resolve: {it.image_path}",
                              record_id=it.id, field="image")
    return items
