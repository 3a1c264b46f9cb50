"""Read dataset manifest records and pull out what each modality encodes.

A manifest file is JSONL, one record per line, with ``image_ref`` paths
relative to the file's directory::

    {"source_id": "...", "style": "...", "split": "...", "task": "cap",
     "image_ref": "images/x.png", "captions": [...]}
    {... "task": "vqa", "pairs": [{"question": "...", ...}, ...]}
    {... "task": "ve",  "pairs": [{"hypothesis": "...", ...}, ...]}

Visual extraction takes one image per record; linguistic extraction takes
one text per caption/question/hypothesis. Row order follows the manifest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class VisualRow:
    row_id: str
    image_path: Path


@dataclass(frozen=True)
class LinguisticRow:
    row_id: str
    text: str


def _records(manifest_path: Path) -> list[dict]:
    records = []
    for lineno, line in enumerate(
        manifest_path.read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ValueError(f"{manifest_path}:{lineno}: bad JSON: {exc}") from None
    if not records:
        raise ValueError(f"{manifest_path}: no records")
    return records


def _texts_of(record: dict) -> list[str]:
    task = record.get("task")
    if task == "cap":
        return list(record["captions"])
    if task == "vqa":
        return [p["question"] for p in record["pairs"]]
    if task == "ve":
        return [p["hypothesis"] for p in record["pairs"]]
    raise ValueError(f"record {record.get('source_id')}: unknown task {task!r}")


def load_manifest(manifest_path: str | Path):
    """Returns (domain, visual_rows, linguistic_rows) for one manifest file."""
    manifest_path = Path(manifest_path)
    records = _records(manifest_path)
    domains = {r.get("style") for r in records}
    if len(domains) != 1:
        raise ValueError(f"{manifest_path}: expected one style domain, found "
                         f"{sorted(d or '?' for d in domains)}")
    base = manifest_path.parent
    visual = []
    linguistic = []
    for record in records:
        rid = record["source_id"]
        path = base / record["image_ref"]
        if not path.is_file():
            raise ValueError(f"record {rid}: image not found: {path}")
        visual.append(VisualRow(row_id=rid, image_path=path))
        for k, text in enumerate(_texts_of(record)):
            if not text.strip():
                raise ValueError(f"record {rid}: empty text unit {k}")
            linguistic.append(LinguisticRow(row_id=f"{rid}#{k}", text=text))
    return domains.pop(), visual, linguistic
