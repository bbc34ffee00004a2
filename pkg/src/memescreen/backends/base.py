"""Backend roles and the interfaces the pipeline programs against.

The pipeline only ever speaks in candidate *strings* ("Yes", "No"); mapping
those to tokenizer ids (leading-space variants and the like) belongs to
whatever serves the chat model.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Protocol, Sequence, runtime_checkable

from ..core import CaptionResult, Engine, LanguageTag, MemeInput, OcrOutcome
from ..errors import InvalidCandidates, MalformedVerdict


class Role(enum.Enum):
    CAPTIONER = "CAPTIONER"
    OCR_PRIMARY = "OCR_PRIMARY"
    OCR_FALLBACK = "OCR_FALLBACK"
    TRANSLATOR = "TRANSLATOR"
    CHAT_LLM = "CHAT_LLM"
    VISION_ANNOTATOR = "VISION_ANNOTATOR"


@dataclass(frozen=True)
class BackendDescriptor:
    role: Role
    name: str
    endpoint: Optional[str] = None
    timeout: float = 30.0
    retries: int = 0

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")


@dataclass(frozen=True)
class NextTokenLogits:
    candidates: Mapping[str, float]

    def __post_init__(self):
        vals = dict(self.candidates)
        for k, v in vals.items():
            if not math.isfinite(v):
                raise ValueError(f"logit for {k!r} is not finite: {v}")
        object.__setattr__(self, "candidates", vals)

    def __getitem__(self, key: str) -> float:
        return self.candidates[key]

    def __contains__(self, key: str) -> bool:
        return key in self.candidates


def check_candidates(candidates: Sequence[str]) -> list[str]:
    cands = list(candidates)
    if not cands:
        raise InvalidCandidates("candidate list is empty")
    if len(set(cands)) != len(cands):
        raise InvalidCandidates(f"candidates must be distinct: {cands}")
    return cands


VERDICTS = ("Yes", "No")


@dataclass(frozen=True)
class AnnotatorVerdict:
    """A harmfulness judgement from a vision annotator."""

    verdict: str
    rationale: str = ""

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise MalformedVerdict(f"verdict must be exactly 'Yes' or 'No', got {self.verdict!r}")


@runtime_checkable
class Captioner(Protocol):
    name: str

    def caption(self, image: MemeInput) -> CaptionResult: ...

    def ping(self) -> bool: ...


@runtime_checkable
class OcrEngine(Protocol):
    name: str

    def recognize(self, image: MemeInput, engine: Engine) -> OcrOutcome: ...

    def ping(self) -> bool: ...


@runtime_checkable
class Translator(Protocol):
    name: str

    def translate(self, text: str, source: LanguageTag) -> str: ...

    def ping(self) -> bool: ...


@runtime_checkable
class ChatLLM(Protocol):
    name: str

    def next_token_logits(self, prompt: str, candidates: Sequence[str]) -> NextTokenLogits: ...

    def ping(self) -> bool: ...


@runtime_checkable
class VisionAnnotator(Protocol):
    name: str

    def annotate(self, image: MemeInput) -> AnnotatorVerdict: ...

    def ping(self) -> bool: ...


@dataclass
class BackendSet:
    """One backend per pipeline role."""

    captioner: Captioner
    ocr_primary: OcrEngine
    ocr_fallback: OcrEngine
    translator: Translator
    llm: ChatLLM
    annotator: Optional[VisionAnnotator] = None
    extra: dict = field(default_factory=dict)

    def by_role(self) -> dict[Role, object]:
        roles = {
            Role.CAPTIONER: self.captioner,
            Role.OCR_PRIMARY: self.ocr_primary,
            Role.OCR_FALLBACK: self.ocr_fallback,
            Role.TRANSLATOR: self.translator,
            Role.CHAT_LLM: self.llm,
        }
        if self.annotator is not None:
            roles[Role.VISION_ANNOTATOR] = self.annotator
        return roles

    def health(self) -> dict[str, dict]:
        out = {}
        for role, backend in self.by_role().items():
            try:
                ok = bool(backend.ping())
            except Exception:
                ok = False
            out[role.value] = {"name": backend.name, "reachable": ok}
        return out

    def close(self) -> None:
        for backend in self.by_role().values():
            close = getattr(backend, "close", None)
            if close is not None:
                close()
