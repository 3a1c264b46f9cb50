"""Synthesize manifests shaped like the published per-style bookkeeping tables.

Counts are (train, valid, test) per style; VQA/VE carry separate image
and unit counts, with units spread across images as evenly as possible.
"""

from styleforge.corpus import Split, Task
from styleforge.dataset import AnnotatedRecord, Manifest
from styleforge.promptkit.styles import Style

CAP_IMAGES = {
    Style.REAL_PHOTO: (2695, 924, 231),
    Style.CARTOON_DRAWING: (2695, 924, 231),
    Style.PENCIL_DRAWING: (2694, 923, 231),
    Style.OIL_PAINTING: (2694, 924, 231),
}

VQA_IMAGES = {
    Style.REAL_PHOTO: (2091, 711, 182),
    Style.CARTOON_DRAWING: (2090, 710, 182),
    Style.PENCIL_DRAWING: (2090, 711, 182),
    Style.OIL_PAINTING: (2091, 711, 182),
}
VQA_QUESTIONS = {
    Style.REAL_PHOTO: (4120, 1452, 340),
    Style.CARTOON_DRAWING: (4118, 1451, 340),
    Style.PENCIL_DRAWING: (4118, 1452, 340),
    Style.OIL_PAINTING: (4120, 1452, 340),
}

VE_IMAGES = {
    Style.REAL_PHOTO: (619, 77, 78),
    Style.CARTOON_DRAWING: (618, 77, 78),
    Style.PENCIL_DRAWING: (619, 77, 78),
    Style.OIL_PAINTING: (619, 77, 78),
}
VE_HYPOTHESES = {
    Style.REAL_PHOTO: (7673, 967, 868),
    Style.CARTOON_DRAWING: (7670, 966, 867),
    Style.PENCIL_DRAWING: (7665, 967, 868),
    Style.OIL_PAINTING: (7666, 967, 868),
}

SPLITS = (Split.TRAIN, Split.VALID, Split.TEST)


def _spread(total_units: int, n_images: int) -> list[int]:
    base, extra = divmod(total_units, n_images)
    return [base + 1 if i < extra else base for i in range(n_images)]


def caption_manifest() -> Manifest:
    records = []
    for style, counts in CAP_IMAGES.items():
        for split, n in zip(SPLITS, counts):
            for i in range(n):
                rid = f"cap-{split.value}-{i:05d}"
                records.append(AnnotatedRecord(
                    source_id=rid, style=style, split=split, task=Task.CAPTION,
                    image_ref=f"images/{rid}.png",
                    captions=tuple(f"caption {k} of {rid}" for k in range(5)),
                ))
    return Manifest(task=Task.CAPTION, records=records)


def vqa_manifest() -> Manifest:
    records = []
    for style in VQA_IMAGES:
        for split, n_img, n_q in zip(SPLITS, VQA_IMAGES[style], VQA_QUESTIONS[style]):
            per_image = _spread(n_q, n_img)
            for i, k in enumerate(per_image):
                rid = f"vqa-{split.value}-{i:05d}"
                pairs = tuple(
                    {"question": f"is it {j}?", "answer": "Yes" if j % 2 else "No",
                     "reused_original_answer": True}
                    for j in range(k)
                )
                records.append(AnnotatedRecord(
                    source_id=rid, style=style, split=split, task=Task.VQA,
                    image_ref=f"images/{rid}.png", vqa_pairs=pairs,
                ))
    return Manifest(task=Task.VQA, records=records)


def ve_manifest() -> Manifest:
    labels = ("entailment", "neutral", "contradiction")
    records = []
    for style in VE_IMAGES:
        for split, n_img, n_h in zip(SPLITS, VE_IMAGES[style], VE_HYPOTHESES[style]):
            per_image = _spread(n_h, n_img)
            for i, k in enumerate(per_image):
                rid = f"ve-{split.value}-{i:05d}"
                pairs = tuple(
                    {"hypothesis": f"thing {j} happens", "label": labels[j % 3],
                     "reused_original_label": True}
                    for j in range(k)
                )
                records.append(AnnotatedRecord(
                    source_id=rid, style=style, split=split, task=Task.VE,
                    image_ref=f"images/{rid}.png", ve_pairs=pairs,
                ))
    return Manifest(task=Task.VE, records=records)
