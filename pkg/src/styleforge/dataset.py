"""Dataset manifests, split assignment, and bookkeeping statistics.

On-disk layout for one task's dataset::

    <root>/
      manifest.json            # task, schema_version, provenance
      <style>/<split>.jsonl    # one annotated record per line
      <style>/images/<id>.png  # referenced by the records

Record schema (one JSON object per line, UTF-8):

    common    source_id, style, split, task, image_ref (relative to the
              style directory)
    cap       captions: [str, ...]
    vqa       pairs: [{question, answer ("Yes"/"No"),
                       reused_original_answer: bool}, ...]
    ve        pairs: [{hypothesis, label ("entailment"/"neutral"/
                       "contradiction"), reused_original_label: bool}, ...]
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Split, Task
from .errors import SchemaError
from .jsonl import read_jsonl
from .promptkit.parsers import VeLabel
from .promptkit.styles import Style

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class AnnotatedRecord:
    source_id: str
    style: Style
    split: Split
    task: Task
    image_ref: str  # path relative to the record's style directory
    captions: tuple[str, ...] = ()
    vqa_pairs: tuple[dict, ...] = ()  # {question, answer, reused_original_answer}
    ve_pairs: tuple[dict, ...] = ()   # {hypothesis, label, reused_original_label}

    def unit_count(self) -> int:
        """Annotation units carried by this record (captions/questions/hypotheses)."""
        if self.task is Task.CAPTION:
            return len(self.captions)
        if self.task is Task.VQA:
            return len(self.vqa_pairs)
        return len(self.ve_pairs)

    def to_json(self) -> dict:
        doc = {
            "source_id": self.source_id,
            "style": self.style.slug,
            "split": self.split.value,
            "task": self.task.value,
            "image_ref": self.image_ref,
        }
        if self.task is Task.CAPTION:
            doc["captions"] = list(self.captions)
        elif self.task is Task.VQA:
            doc["pairs"] = [dict(p) for p in self.vqa_pairs]
        else:
            doc["pairs"] = [dict(p) for p in self.ve_pairs]
        return doc


def record_from_json(doc: dict) -> AnnotatedRecord:
    try:
        task = Task.from_slug(doc["task"])
        style = Style.from_slug(doc["style"])
        split = Split.from_slug(doc["split"])
        rec = AnnotatedRecord(
            source_id=doc["source_id"],
            style=style,
            split=split,
            task=task,
            image_ref=doc["image_ref"],
            captions=tuple(doc.get("captions") or ()),
            vqa_pairs=tuple(doc.get("pairs") or ()) if task is Task.VQA else (),
            ve_pairs=tuple(doc.get("pairs") or ()) if task is Task.VE else (),
        )
    except KeyError as exc:
        raise SchemaError(f"record missing field {exc}", record_id=doc.get("source_id")) from None
    _validate_record(rec)
    return rec


def _validate_record(rec: AnnotatedRecord) -> None:
    rid = rec.source_id
    if not rid:
        raise SchemaError("empty source_id", field="source_id")
    if rec.task is Task.CAPTION:
        if not rec.captions or any(not c.strip() for c in rec.captions):
            raise SchemaError("caption record needs non-empty captions",
                              record_id=rid, field="captions")
    elif rec.task is Task.VQA:
        if not rec.vqa_pairs:
            raise SchemaError("vqa record has no pairs", record_id=rid, field="pairs")
        for p in rec.vqa_pairs:
            if p.get("answer") not in ("Yes", "No"):
                raise SchemaError(f"vqa answer must be Yes/No, got {p.get('answer')!r}",
                                  record_id=rid, field="pairs.answer")
            if not p.get("question", "").strip():
                raise SchemaError("empty question", record_id=rid, field="pairs.question")
            if not isinstance(p.get("reused_original_answer"), bool):
                raise SchemaError("missing reused_original_answer", record_id=rid,
                                  field="pairs.reused_original_answer")
    else:
        if not rec.ve_pairs:
            raise SchemaError("ve record has no pairs", record_id=rid, field="pairs")
        for p in rec.ve_pairs:
            try:
                VeLabel(p.get("label", ""))
            except ValueError:
                raise SchemaError(f"bad ve label {p.get('label')!r}", record_id=rid,
                                  field="pairs.label") from None
            if not p.get("hypothesis", "").strip():
                raise SchemaError("empty hypothesis", record_id=rid, field="pairs.hypothesis")
            if not isinstance(p.get("reused_original_label"), bool):
                raise SchemaError("missing reused_original_label", record_id=rid,
                                  field="pairs.reused_original_label")


@dataclass
class Manifest:
    task: Task
    records: list[AnnotatedRecord]
    provenance: dict = field(default_factory=dict)

    def validate(self, *, root: Path | None = None, check_images: bool = True) -> None:
        seen: set[tuple[str, str]] = set()
        for rec in self.records:
            if rec.task is not self.task:
                raise SchemaError(f"record task {rec.task.value} in {self.task.value} manifest",
                                  record_id=rec.source_id, field="task")
            _validate_record(rec)
            key = (rec.source_id, rec.style.slug)
            if key in seen:
                raise SchemaError("duplicate (source_id, style)", record_id=rec.source_id,
                                  field="source_id")
            seen.add(key)
            if check_images:
                if root is None:
                    raise SchemaError("image check requested without a manifest root")
                path = root / rec.style.slug / rec.image_ref
                if not path.is_file():
                    raise SchemaError(f"image_ref does not resolve: {path}",
                                      record_id=rec.source_id, field="image_ref")


def write_manifest(manifest: Manifest, root: str | Path) -> None:
    """Persist a manifest in the canonical layout. Fails on invariant violations."""
    root = Path(root)
    manifest.validate(root=root, check_images=False)
    root.mkdir(parents=True, exist_ok=True)
    meta = {
        "schema_version": SCHEMA_VERSION,
        "task": manifest.task.value,
        "provenance": manifest.provenance,
    }
    (root / "manifest.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    by_file: dict[tuple[str, str], list[AnnotatedRecord]] = {}
    for rec in manifest.records:
        by_file.setdefault((rec.style.slug, rec.split.value), []).append(rec)
    for (style_slug, split_value), recs in sorted(by_file.items()):
        path = root / style_slug / f"{split_value}.jsonl"
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [json.dumps(r.to_json(), ensure_ascii=False, sort_keys=True) for r in recs]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_manifest(root: str | Path, *, check_images: bool = True) -> Manifest:
    """Load a manifest from the canonical layout and validate every invariant."""
    root = Path(root)
    meta_path = root / "manifest.json"
    if not meta_path.is_file():
        raise SchemaError(f"no manifest.json under {root}")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    task = Task.from_slug(meta["task"])
    records: list[AnnotatedRecord] = []
    for style_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for split_path in sorted(style_dir.glob("*.jsonl")):
            for doc in read_jsonl(split_path):
                records.append(record_from_json(doc))
    manifest = Manifest(task=task, records=records, provenance=meta.get("provenance", {}))
    manifest.validate(root=root, check_images=check_images)
    return manifest


# --- split assignment ----------------------------------------------------

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    """One step of the splitmix64 stream: (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z = z ^ (z >> 31)
    return state, z


def _seeded_shuffle(items: list, seed: int) -> list:
    """Fisher-Yates with a splitmix64 stream; portable across implementations."""
    out = list(items)
    state = seed & _MASK64
    for i in range(len(out) - 1, 0, -1):
        state, z = _splitmix64(state)
        j = z % (i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def apportion(total: int, ratios: tuple[float, ...]) -> list[int]:
    """Largest-remainder apportionment of ``total`` into len(ratios) buckets.

    Remaining seats go to the largest fractional remainders; exact ties
    are broken in favor of the later-listed bucket, which is what
    reproduces the published 619/77/78 split of 774 items at 8:1:1.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")
    quotas = [total * r for r in ratios]
    counts = [int(q) for q in quotas]
    remainders = [q - c for q, c in zip(quotas, counts)]
    seats = total - sum(counts)
    order = sorted(range(len(ratios)), key=lambda i: (remainders[i], i), reverse=True)
    for i in order[:seats]:
        counts[i] += 1
    return counts


def split_by_ratio(ids: list[str], ratios: tuple[float, float, float],
                   seed: int) -> dict[str, Split]:
    """Deterministically assign whole images to train/valid/test.

    Assignment is by image id, so every annotation unit of an image lands
    in the same split; ids are sorted before the seeded shuffle, making
    the result invariant under input reordering.
    """
    if not ids:
        raise ValueError("no ids to split")
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate ids")
    shuffled = _seeded_shuffle(sorted(ids), seed)
    counts = apportion(len(ids), ratios)
    assignment: dict[str, Split] = {}
    offset = 0
    for split, count in zip((Split.TRAIN, Split.VALID, Split.TEST), counts):
        for item_id in shuffled[offset:offset + count]:
            assignment[item_id] = split
        offset += count
    return assignment


# --- statistics -----------------------------------------------------------

@dataclass(frozen=True)
class StatsCell:
    images: int
    units: int
    label_histogram: dict


@dataclass
class StatsReport:
    task: Task
    cells: dict  # (style_slug, split_value) -> StatsCell

    def images(self, style: Style, split: Split) -> int:
        cell = self.cells.get((style.slug, split.value))
        return cell.images if cell else 0

    def units(self, style: Style, split: Split) -> int:
        cell = self.cells.get((style.slug, split.value))
        return cell.units if cell else 0

    def style_total_images(self, style: Style) -> int:
        return sum(self.images(style, sp) for sp in Split)

    def style_total_units(self, style: Style) -> int:
        return sum(self.units(style, sp) for sp in Split)

    def to_json(self) -> dict:
        entries = []
        for (style_slug, split_value), cell in sorted(self.cells.items()):
            entries.append({
                "style": style_slug,
                "split": split_value,
                "images": cell.images,
                "units": cell.units,
                "labels": dict(sorted(cell.label_histogram.items())),
            })
        return {"schema_version": SCHEMA_VERSION, "task": self.task.value,
                "entries": entries}


def compute_stats(manifest: Manifest) -> StatsReport:
    """Exact per-(style, split) counts plus label histograms for VQA/VE."""
    cells: dict[tuple[str, str], dict] = {}
    for rec in manifest.records:
        key = (rec.style.slug, rec.split.value)
        cell = cells.setdefault(key, {"images": 0, "units": 0, "labels": {}})
        cell["images"] += 1
        cell["units"] += rec.unit_count()
        if rec.task is Task.VQA:
            for p in rec.vqa_pairs:
                cell["labels"][p["answer"]] = cell["labels"].get(p["answer"], 0) + 1
        elif rec.task is Task.VE:
            for p in rec.ve_pairs:
                cell["labels"][p["label"]] = cell["labels"].get(p["label"], 0) + 1
    return StatsReport(
        task=manifest.task,
        cells={k: StatsCell(images=v["images"], units=v["units"],
                            label_histogram=v["labels"]) for k, v in cells.items()},
    )


_UNIT_NAMES = {Task.CAPTION: "captions", Task.VQA: "questions", Task.VE: "hypotheses"}


def render_stats(report: StatsReport, fmt: str = "text") -> str:
    """Render a report as a text table, canonical JSON, or CSV."""
    if fmt == "json":
        return json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        lines = ["style,split,images,units"]
        for (style_slug, split_value), cell in sorted(report.cells.items()):
            lines.append(f"{style_slug},{split_value},{cell.images},{cell.units}")
        return "\n".join(lines) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown stats format {fmt!r}")

    unit_name = _UNIT_NAMES[report.task]
    header = f"{'style':<10}{'split':<8}{'images':>8}{unit_name:>12}"
    lines = [header, "-" * len(header)]
    styles = [s for s in Style if any(k[0] == s.slug for k in report.cells)]
    for style in styles:
        for split in Split:
            lines.append(
                f"{style.slug:<10}{split.value:<8}"
                f"{report.images(style, split):>8}{report.units(style, split):>12}"
            )
        lines.append(
            f"{style.slug:<10}{'Total':<8}"
            f"{report.style_total_images(style):>8}{report.style_total_units(style):>12}"
        )
    return "\n".join(lines) + "\n"
