import io
import sys
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

sys.path.insert(0, str(Path(__file__).parent))

from memescreen.core import MemeInput  # noqa: E402

DATA = Path(__file__).parent / "data"


def solid_meme(meme_id, color=(10, 20, 30), size=(16, 12)):
    w, h = size
    px = np.empty((h, w, 3), dtype=np.uint8)
    px[...] = color
    return MemeInput(meme_id, px)


def png_bytes(color=(200, 100, 50), size=(8, 8), mode="RGB"):
    buf = io.BytesIO()
    Image.new(mode, size, color).save(buf, format="PNG")
    return buf.getvalue()


@pytest.fixture
def meme():
    return solid_meme("m1")


@pytest.fixture
def data_dir():
    return DATA


# one summary line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
