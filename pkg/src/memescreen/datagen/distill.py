"""Chat-style distillation examples from annotator verdicts.

Each example pairs the scoring prompt for a meme (its caption and OCR text
substituted into the template) with the annotator's answer: ``Yes`` or
``No``, then a newline and the rationale when there is one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from ..backends.base import VERDICTS, AnnotatorVerdict, BackendSet, VisionAnnotator
from ..classify.prompt import PromptTemplate, build_prompt
from ..core import MemeInput
from ..errors import MalformedVerdict
from ..ocr_cascade import CascadeConfig, cascade_recognize


@dataclass(frozen=True)
class ChatExample:
    question: str
    answer: str
    meme_id: Optional[str] = None

    def __post_init__(self):
        head = self.answer.split("\n", 1)[0]
        if head not in VERDICTS:
            raise MalformedVerdict(f"answer must begin with exactly 'Yes' or 'No': {self.answer[:40]!r}")

    def to_record(self) -> dict:
        rec = {
            "messages": [
                {"role": "user", "content": self.question},
                {"role": "assistant", "content": self.answer},
            ]
        }
        if self.meme_id is not None:
            rec = {"id": self.meme_id, **rec}
        return rec


def as_verdict(raw) -> AnnotatorVerdict:
    if isinstance(raw, AnnotatorVerdict):
        return raw
    if isinstance(raw, Mapping):
        if "verdict" not in raw:
            raise MalformedVerdict(f"verdict record has no 'verdict' field: {dict(raw)}")
        return AnnotatorVerdict(str(raw["verdict"]), str(raw.get("rationale") or ""))
    if isinstance(raw, str):
        return AnnotatorVerdict(raw, "")
    if isinstance(raw, Sequence) and 1 <= len(raw) <= 2:
        return AnnotatorVerdict(str(raw[0]), str(raw[1]) if len(raw) > 1 else "")
    raise MalformedVerdict(f"cannot read a verdict from {raw!r}")


def format_answer(verdict: AnnotatorVerdict) -> str:
    rationale = verdict.rationale.strip()
    return f"{verdict.verdict}\n{rationale}" if rationale else verdict.verdict


def annotate_memes(memes: Iterable[MemeInput], annotator: VisionAnnotator) -> list[tuple]:
    return [(m, annotator.annotate(m)) for m in memes]


def build_distill_dataset(
    memes: Sequence[tuple],
    backends: BackendSet,
    template: Optional[PromptTemplate] = None,
    cascade: CascadeConfig = CascadeConfig(),
) -> list[ChatExample]:
    """One ``ChatExample`` per ``(MemeInput, verdict)`` pair.

    Every verdict is validated before any backend is called, so a single
    malformed verdict rejects the whole set.
    """
    verdicts = [as_verdict(v) for _, v in memes]
    out = []
    for (meme, _), verdict in zip(memes, verdicts):
        caption = backends.captioner.caption(meme)
        ocr = cascade_recognize(meme, backends.ocr_primary, backends.ocr_fallback, cascade)
        question = build_prompt(caption.text, ocr.text, template)
        out.append(ChatExample(question, format_answer(verdict), meme.id))
    return out


def write_chat_jsonl(examples: Iterable[ChatExample], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ex in examples:
            fh.write(json.dumps(ex.to_record(), ensure_ascii=False) + "\n")


def read_verdicts(path: Union[str, Path]) -> dict[str, dict]:
    """JSON-lines file of ``{"id", "verdict", "rationale"}`` records, keyed by id."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedVerdict(f"{path}:{n}: not valid JSON ({exc.msg})") from exc
            if not isinstance(rec, dict) or "id" not in rec:
                raise MalformedVerdict(f"{path}:{n}: record has no 'id'")
            out[str(rec["id"])] = rec
    return out
