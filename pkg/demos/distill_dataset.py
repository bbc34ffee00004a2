"""
Building a distillation chat dataset
====================================

Each meme becomes a user turn (the scoring prompt) and an assistant turn
that starts with the annotator's Yes or No.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from memescreen.backends import mock_backends
from memescreen.core import MemeInput
from memescreen.datagen import ChatExample, annotate_memes, build_distill_dataset, write_chat_jsonl
from memescreen.errors import MalformedVerdict

memes = [MemeInput(f"d{i}", np.full((32, 32, 3), 40 * i, dtype=np.uint8)) for i in range(3)]
backends = mock_backends(
    captions={"d0": "a photo of a woman in a kitchen", "d1": "a dog on a sofa"},
    primary={"d0": ("women belong here", 0.96), "d1": ("monday mood", 0.93)},
    annotations={"d0": ("Yes", "It reduces women to a domestic role.")},
)

examples = build_distill_dataset(annotate_memes(memes, backends.annotator), backends)
for ex in examples:
    print(ex.meme_id, repr(ex.answer))

out = Path(tempfile.mkdtemp()) / "distill.jsonl"
write_chat_jsonl(examples, out)
print(json.dumps(json.loads(out.read_text().splitlines()[0]), ensure_ascii=False, indent=1)[:400])

# verdicts that are not exactly Yes/No are refused
for bad in [("yes", ""), ("Probably", "hard to say")]:
    try:
        build_distill_dataset([(memes[0], bad)], backends)
    except MalformedVerdict as exc:
        print("rejected:", exc)

try:
    ChatExample("q", "Yes, because")
except MalformedVerdict as exc:
    print("rejected:", exc)
