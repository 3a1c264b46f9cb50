import io
import json
from pathlib import Path

import pytest
from PIL import Image


def make_png(color, size=(32, 32)) -> bytes:
    buf = io.BytesIO()
    Image.new("RGB", size, color).save(buf, format="PNG")
    return buf.getvalue()


def write_manifest(root: Path, *, style="real", duplicate_last=False) -> Path:
    """A three-image caption manifest in the dataset record schema."""
    (root / "images").mkdir(parents=True, exist_ok=True)
    colors = [(200, 40, 40), (40, 200, 40), (40, 40, 200)]
    if duplicate_last:
        colors[-1] = colors[0]
    lines = []
    for i, color in enumerate(colors):
        rid = f"img{i:02d}"
        (root / "images" / f"{rid}.png").write_bytes(make_png(color))
        lines.append(json.dumps({
            "source_id": rid,
            "style": style,
            "split": "train",
            "task": "cap",
            "image_ref": f"images/{rid}.png",
            "captions": [f"caption one of {rid}", f"caption two of {rid}"],
        }, sort_keys=True))
    path = root / "train.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def manifest(tmp_path) -> Path:
    return write_manifest(tmp_path)
