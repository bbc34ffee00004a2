"""
The OCR confidence gate
=======================

The primary result survives only above the gate; otherwise the fallback
engine gets a second attempt.
"""

import numpy as np

from memescreen.backends import MockOcrEngine
from memescreen.core import Engine, MemeInput
from memescreen.ocr_cascade import CascadeConfig, cascade_recognize

px = np.full((64, 64, 3), 255, dtype=np.uint8)
meme = MemeInput("m", px)

for conf in (0.97, 0.91, 0.90, 0.42):
    primary = MockOcrEngine({"m": ("wrong-ish text", conf)})
    fallback = MockOcrEngine({"m": ("வணக்கம்", 0.70)})
    out = cascade_recognize(meme, primary, fallback, CascadeConfig(0.9))
    print(f"primary conf {conf:.2f} -> {out.engine.value:8s} {out.text!r} (fallback calls: {fallback.calls})")

# a blank image: nothing found, still a valid outcome
out = cascade_recognize(meme, MockOcrEngine(), MockOcrEngine())
print(repr(out.text), out.confidence, out.engine.value)

# several spans are read top-to-bottom, left-to-right; the weakest span
# sets the confidence
spans = {"m": {"spans": [
    {"text": "BOTTOM", "conf": 0.99, "box": [4, 40, 40, 12]},
    {"text": "right", "conf": 0.93, "box": [34, 4, 28, 12]},
    {"text": "left", "conf": 0.96, "box": [2, 4, 28, 12]},
]}}
out = MockOcrEngine(spans).recognize(meme, Engine.PRIMARY)
print(out.text, out.confidence)
