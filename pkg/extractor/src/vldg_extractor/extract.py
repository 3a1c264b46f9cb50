"""Manifest-to-VLDG extraction: one call, one file."""

from __future__ import annotations

from pathlib import Path

from .encoders import ExtractorConfig, LinguisticEncoder, VisualEncoder
from .manifest import load_manifest
from .vldg import read_header, write_vldg


def extract(manifest_path: str | Path, cfg: ExtractorConfig,
            out_path: str | Path) -> tuple[int, int]:
    """Encode every unit of a manifest and write the VLDG file.

    Visual: one vector per record's image. Linguistic: one vector per
    caption/question/hypothesis. Row order follows the manifest. Returns
    (count, dim) as verified from the written header.
    """
    domain, visual_rows, linguistic_rows = load_manifest(manifest_path)

    if cfg.modality == "visual":
        encoder = VisualEncoder(cfg)
        vectors = encoder.encode_paths([r.image_path for r in visual_rows])
        ids = [r.row_id for r in visual_rows]
    else:
        encoder = LinguisticEncoder(cfg)
        vectors = encoder.encode_texts([r.text for r in linguistic_rows])
        ids = [r.row_id for r in linguistic_rows]

    if vectors.shape != (len(ids), encoder.dim):
        raise RuntimeError(f"encoder produced {vectors.shape}, expected "
                           f"({len(ids)}, {encoder.dim})")
    write_vldg(out_path, vectors, ids, domain=domain, modality=cfg.modality)

    count, dim = read_header(out_path)
    if (count, dim) != (len(ids), encoder.dim):
        raise RuntimeError("written header disagrees with payload")
    return count, dim
