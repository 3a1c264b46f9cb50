"""Run drivers: resumable batch execution of the pipeline stages.

A working directory accumulates stage outputs::

    <work>/
      <style>/<split>/<id>.png   stylized images
      stylized.jsonl             one line per emitted (item, style)
      annotated.jsonl            one line per annotated (item, style)
      omitted.jsonl              patience exhaustions, with attempt logs
      run.json                   snapshot of the last run in this directory

Completed (item, style) units are skipped on re-invocation, so an
interrupted run picks up where it stopped and, across the same inputs,
produces identical final outputs. Appends are single-write and torn
trailing lines are ignored on load, so a kill mid-write cannot corrupt
the stage files.
"""

from __future__ import annotations

import json
import shutil
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .annotate import DroppedPair, annotate_item, task_system_prompt
from .corpus import SourceItem, Split, Task
from .dataset import SCHEMA_VERSION, AnnotatedRecord, Manifest, write_manifest
from .errors import SchemaError
from .jsonl import JsonlWriter, read_jsonl
from .promptkit.styles import Style
from .promptkit.templates import PromptTemplate, TemplateId
from .provider.base import Provider
from .stylize import Omitted, PipelineConfig, StylizedImage, stylize_item

STYLIZED_FILE = "stylized.jsonl"
ANNOTATED_FILE = "annotated.jsonl"
OMITTED_FILE = "omitted.jsonl"


@dataclass
class RunSummary:
    emitted: int = 0
    omitted: int = 0
    skipped: int = 0

    def as_dict(self) -> dict:
        return {"emitted": self.emitted, "omitted": self.omitted, "skipped": self.skipped}


def _unit_key(record: dict) -> tuple[str, str]:
    return (record["id"], record["style"])


def completed_units(work: Path, stage_file: str) -> set[tuple[str, str]]:
    done = {_unit_key(r) for r in read_jsonl(work / stage_file)}
    done |= {
        _unit_key(r)
        for r in read_jsonl(work / OMITTED_FILE)
        if r.get("stage") == ("stylize" if stage_file == STYLIZED_FILE else "annotate")
    }
    return done


def stylized_image_path(work: Path, style: Style, split_value: str, item_id: str) -> Path:
    return work / style.slug / split_value / f"{item_id}.png"


def run_stylize(
    items: list[SourceItem],
    styles: list[Style],
    cfg: PipelineConfig,
    provider: Provider,
    templates: dict[TemplateId, PromptTemplate],
    work: str | Path,
    *,
    jobs: int = 1,
    progress=None,
    unit_hook=None,
) -> RunSummary:
    """Produce a stylized image (or an omission record) for every
    (item, style) unit not already completed in the working directory."""
    if Style.REAL_PHOTO in styles:
        raise SchemaError("the real-photo domain is source data, not a stylization target")
    work = Path(work)
    work.mkdir(parents=True, exist_ok=True)
    done = completed_units(work, STYLIZED_FILE)
    units = [(item, style) for item in items for style in styles]
    summary = RunSummary(skipped=sum(1 for u in units if (u[0].id, u[1].slug) in done))
    pending = [(item, style) for item, style in units if (item.id, style.slug) not in done]

    with JsonlWriter(work / STYLIZED_FILE) as stylized_out, \
         JsonlWriter(work / OMITTED_FILE) as omitted_out:

        def handle(item: SourceItem, style: Style) -> str:
            # the whole unit runs under its task's annotator persona
            result = stylize_item(item, style, cfg, provider, templates,
                                  system_prompt=task_system_prompt(item.task, templates))
            if isinstance(result, StylizedImage):
                image_path = stylized_image_path(work, style, item.split.value, item.id)
                image_path.parent.mkdir(parents=True, exist_ok=True)
                image_path.write_bytes(result.image)
                stylized_out.append({
                    "id": item.id,
                    "style": style.slug,
                    "split": item.split.value,
                    "task": item.task.value,
                    "image": str(image_path.relative_to(work)),
                    "reconstruction_prompt": result.reconstruction_prompt,
                    "styled_prompt": result.styled_prompt,
                    "attempts": result.attempts,
                    "verdicts": [v.value for v in result.verdict_log],
                })
                summary.emitted += 1
                return "ok"
            assert isinstance(result, Omitted)
            omitted_out.append({
                "id": item.id,
                "style": style.slug,
                "stage": "stylize",
                "failed_step": result.stage,
                "attempts": result.attempts,
                "failures": list(result.failures),
            })
            summary.omitted += 1
            return "omitted"

        _drive(pending, handle, provider, jobs=jobs, progress=progress,
               unit_hook=unit_hook, stage="stylize")
    return summary


def _drive(pending, handle, provider, *, jobs, progress, unit_hook, stage):
    total = len(pending)
    if jobs <= 1:
        for index, (item, style) in enumerate(pending, start=1):
            outcome = handle(item, style)
            if progress:
                progress(f"[{stage}] {item.id}/{style.slug} {outcome} "
                         f"({index}/{total}) cost=${provider.ledger.total_usd:.4f}")
            if unit_hook:
                unit_hook(index, total)
        return
    # bounded pool; units are independent, each unit stays sequential
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = {pool.submit(handle, item, style): (item, style)
                   for item, style in pending}
        for index, future in enumerate(futures, start=1):
            item, style = futures[future]
            outcome = future.result()
            if progress:
                progress(f"[{stage}] {item.id}/{style.slug} {outcome} "
                         f"({index}/{total}) cost=${provider.ledger.total_usd:.4f}")
            if unit_hook:
                unit_hook(index, total)


def _payload_to_json(payload) -> dict:
    from .annotate import CaptionPayload, VePayload, VqaPayload

    if isinstance(payload, CaptionPayload):
        return {"captions": list(payload.captions)}
    if isinstance(payload, VqaPayload):
        return {"pairs": [
            {"question": p.question, "answer": p.answer,
             "reused_original_answer": p.reused_original_answer}
            for p in payload.pairs
        ]}
    assert isinstance(payload, VePayload)
    return {"pairs": [
        {"hypothesis": p.hypothesis, "label": p.label.value,
         "reused_original_label": p.reused_original_label}
        for p in payload.pairs
    ]}


def run_annotate(
    items: list[SourceItem],
    styles: list[Style],
    cfg: PipelineConfig,
    provider: Provider,
    templates: dict[TemplateId, PromptTemplate],
    stylized_dir: str | Path,
    out_dir: str | Path | None = None,
    *,
    jobs: int = 1,
    progress=None,
    unit_hook=None,
) -> RunSummary:
    """Annotate every stylized (item, style) unit not yet annotated.

    Inputs (stylized.jsonl and images) come from ``stylized_dir``;
    annotation outputs land in ``out_dir`` (the same directory when not
    given, which is the usual layout). Recorded image paths stay relative
    to ``stylized_dir``."""
    stylized_root = Path(stylized_dir)
    work = Path(out_dir) if out_dir is not None else stylized_root
    if not (stylized_root / STYLIZED_FILE).exists():
        raise SchemaError(f"no {STYLIZED_FILE} under {stylized_root}; run stylize first")
    stylized_index = {_unit_key(r): r for r in read_jsonl(stylized_root / STYLIZED_FILE)}
    done = completed_units(work, ANNOTATED_FILE)
    items_by_id = {item.id: item for item in items}

    pending: list[tuple[SourceItem, Style]] = []
    summary = RunSummary()
    for (item_id, style_slug), rec in sorted(stylized_index.items()):
        item = items_by_id.get(item_id)
        if item is None or item.task.value != rec["task"]:
            continue
        if Style.from_slug(style_slug) not in styles:
            continue
        if (item_id, style_slug) in done:
            summary.skipped += 1
            continue
        pending.append((item, Style.from_slug(style_slug)))

    with JsonlWriter(work / ANNOTATED_FILE) as annotated_out, \
         JsonlWriter(work / OMITTED_FILE) as omitted_out:

        def handle(item: SourceItem, style: Style) -> str:
            rec = stylized_index[(item.id, style.slug)]
            stylized_bytes = (stylized_root / rec["image"]).read_bytes()
            payload, dropped = annotate_item(item, style, stylized_bytes, cfg,
                                             provider, templates)
            if payload is None:
                omitted_out.append({
                    "id": item.id,
                    "style": style.slug,
                    "stage": "annotate",
                    "attempts": cfg.patience,
                    "failures": [f"pair {d.index}: {d.reason}" for d in dropped],
                    "dropped_pairs": _dropped_json(dropped),
                })
                summary.omitted += 1
                return "omitted"
            annotated_out.append({
                "id": item.id,
                "style": style.slug,
                "split": item.split.value,
                "task": item.task.value,
                "image": rec["image"],
                "payload": _payload_to_json(payload),
                "dropped_pairs": _dropped_json(dropped),
            })
            summary.emitted += 1
            return "ok"

        _drive(pending, handle, provider, jobs=jobs, progress=progress,
               unit_hook=unit_hook, stage="annotate")
    return summary


def _dropped_json(dropped: list[DroppedPair]) -> list[dict]:
    return [{"index": d.index, "reason": d.reason, "failures": list(d.failures)}
            for d in dropped]


def _real_record(item: SourceItem, image_ref: str) -> AnnotatedRecord:
    if item.task is Task.CAPTION:
        return AnnotatedRecord(
            source_id=item.id, style=Style.REAL_PHOTO, split=item.split,
            task=item.task, image_ref=image_ref, captions=item.captions,
        )
    if item.task is Task.VQA:
        pairs = tuple(
            {"question": p.question, "answer": p.answer, "reused_original_answer": True}
            for p in item.vqa_pairs
        )
        return AnnotatedRecord(
            source_id=item.id, style=Style.REAL_PHOTO, split=item.split,
            task=item.task, image_ref=image_ref, vqa_pairs=pairs,
        )
    pairs = tuple(
        {"hypothesis": p.hypothesis, "label": p.label.value, "reused_original_label": True}
        for p in item.ve_pairs
    )
    return AnnotatedRecord(
        source_id=item.id, style=Style.REAL_PHOTO, split=item.split,
        task=item.task, image_ref=image_ref, ve_pairs=pairs,
    )


def _annotated_record(doc: dict) -> AnnotatedRecord:
    task = Task.from_slug(doc["task"])
    payload = doc["payload"]
    common = dict(
        source_id=doc["id"],
        style=Style.from_slug(doc["style"]),
        split=Split.from_slug(doc["split"]),
        task=task,
        image_ref=f"images/{doc['id']}.png",
    )
    if task is Task.CAPTION:
        return AnnotatedRecord(**common, captions=tuple(payload["captions"]))
    if task is Task.VQA:
        return AnnotatedRecord(**common, vqa_pairs=tuple(payload["pairs"]))
    return AnnotatedRecord(**common, ve_pairs=tuple(payload["pairs"]))


def run_assemble(
    items: list[SourceItem],
    task: Task,
    styles: list[Style],
    work: str | Path,
    out_root: str | Path,
    *,
    stylized_dir: str | Path | None = None,
    provenance: dict | None = None,
) -> Manifest:
    """Merge source data (the real-photo domain) with annotate outputs
    into the canonical per-task dataset layout under ``out_root/<task>``.

    ``work`` holds annotated.jsonl; image paths inside it resolve against
    ``stylized_dir`` (defaults to ``work``)."""
    work = Path(work)
    stylized_root = Path(stylized_dir) if stylized_dir is not None else work
    out = Path(out_root) / task.value
    items = [item for item in items if item.task is task]
    items_by_id = {item.id: item for item in items}

    records: list[AnnotatedRecord] = []
    copies: list[tuple[Path, Path]] = []

    for item in items:
        ext = item.image_path.suffix or ".png"
        image_ref = f"images/{item.id}{ext}"
        records.append(_real_record(item, image_ref))
        copies.append((item.image_path, out / Style.REAL_PHOTO.slug / image_ref))

    wanted = {s.slug for s in styles if s is not Style.REAL_PHOTO}
    for doc in read_jsonl(work / ANNOTATED_FILE):
        if doc["task"] != task.value or doc["style"] not in wanted:
            continue
        if doc["id"] not in items_by_id:
            raise SchemaError("annotated record without source item", record_id=doc["id"])
        records.append(_annotated_record(doc))
        copies.append((stylized_root / doc["image"],
                       out / doc["style"] / f"images/{doc['id']}.png"))

    records.sort(key=lambda r: (r.style.slug, r.split.value, r.source_id))
    manifest = Manifest(
        task=task,
        records=records,
        provenance=provenance or {},
    )
    write_manifest(manifest, out)
    for src, dst in copies:
        dst.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(src, dst)
    manifest.validate(root=out, check_images=True)
    return manifest


def write_run_report(
    out_dir: str | Path,
    *,
    command: str,
    config_snapshot: dict,
    summary: RunSummary,
    cost_total_usd: float,
    provider_calls: int,
    interrupted: bool = False,
) -> None:
    """Snapshot of one run: configuration, counts, cost, omissions."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config_snapshot,
        "counts": summary.as_dict(),
        "cost_total_usd": cost_total_usd,
        "provider_calls": provider_calls,
        "interrupted": interrupted,
        "finished_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tmp = out_dir / "run.json.tmp"
    tmp.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    tmp.replace(out_dir / "run.json")
