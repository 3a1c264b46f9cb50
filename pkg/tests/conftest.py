import io

import pytest
from PIL import Image


def make_png(color: tuple[int, int, int], size: tuple[int, int] = (8, 8)) -> bytes:
    """Deterministic tiny PNG for request/fixture plumbing."""
    buf = io.BytesIO()
    Image.new("RGB", size, color).save(buf, format="PNG")
    return buf.getvalue()


@pytest.fixture
def red_png() -> bytes:
    return make_png((200, 30, 30))


@pytest.fixture
def blue_png() -> bytes:
    return make_png((30, 30, 200))
