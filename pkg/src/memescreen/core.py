"""Domain types shared by every stage of the pipeline.

All types are frozen dataclasses. Image pixels are stored as a read-only
``uint8`` array of shape ``(height, width, 3)`` so a ``MemeInput`` can be
handed to concurrent workers without copying.
"""

from __future__ import annotations

import enum
import hashlib
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np
from PIL import Image

from .errors import EmptyId, NonpositiveTemperature, UndecodableImage

# label = 1 iff probability is strictly above this
DEFAULT_DECISION_THRESHOLD = 0.5

Box = Tuple[int, int, int, int]  # x, y, w, h


class Engine(enum.Enum):
    PRIMARY = "PRIMARY"
    FALLBACK = "FALLBACK"


class Language(enum.Enum):
    ENGLISH = "ENGLISH"
    CHINESE = "CHINESE"
    MALAY = "MALAY"
    TAMIL = "TAMIL"
    UNKNOWN = "UNKNOWN"


class Stage(enum.Enum):
    CAPTION = "CAPTION"
    OCR = "OCR"
    TRANSLATE = "TRANSLATE"
    SCORE = "SCORE"


@dataclass(frozen=True, eq=False)
class MemeInput:
    id: str
    pixels: np.ndarray
    source_path: Optional[str] = None

    def __post_init__(self):
        if not self.id:
            raise EmptyId("meme id must be a non-empty string")
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3 or px.dtype != np.uint8:
            raise UndecodableImage(f"expected uint8 (H, W, 3) pixels, got {px.dtype} {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise UndecodableImage("image must be at least 1x1")
        if px.flags.writeable:
            px = px.copy()
            px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @cached_property
    def content_hash(self) -> str:
        """SHA-256 over the canonical RGB raster (dimensions included)."""
        h = hashlib.sha256()
        h.update(f"{self.width}x{self.height}:".encode("ascii"))
        h.update(self.pixels.tobytes())
        return h.hexdigest()

    def to_pil(self) -> Image.Image:
        return Image.fromarray(np.ascontiguousarray(self.pixels), mode="RGB")

    def to_png(self) -> bytes:
        buf = io.BytesIO()
        self.to_pil().save(buf, format="PNG")
        return buf.getvalue()

    @classmethod
    def from_pil(cls, image: Image.Image, id: str, source_path: Optional[str] = None) -> "MemeInput":
        return cls(id=id, pixels=np.asarray(_to_rgb(image)), source_path=source_path)


def _to_rgb(image: Image.Image) -> Image.Image:
    # alpha is flattened over white
    if image.mode == "RGB":
        return image
    if image.mode in ("RGBA", "LA", "PA") or (image.mode == "P" and "transparency" in image.info):
        rgba = image.convert("RGBA")
        base = Image.new("RGBA", rgba.size, (255, 255, 255, 255))
        return Image.alpha_composite(base, rgba).convert("RGB")
    if image.mode.startswith("I;16"):
        image = image.convert("I")
    if image.mode in ("I", "F"):
        arr = np.asarray(image, dtype=np.float64)
        lo, hi = float(arr.min()), float(arr.max())
        scale = 255.0 / (hi - lo) if hi > lo else 0.0
        image = Image.fromarray(((arr - lo) * scale).astype(np.uint8), mode="L")
    return image.convert("RGB")


def validate_meme_input(raw: bytes, id: str, source_path: Optional[str] = None) -> MemeInput:
    """Decode an image payload into a ``MemeInput``.

    Decoding is total: any byte sequence yields a ``MemeInput`` or raises
    ``UndecodableImage`` / ``EmptyId``. Animated images contribute their
    first frame only.
    """
    if not id:
        raise EmptyId("meme id must be a non-empty string")
    if not raw:
        raise UndecodableImage("empty payload")
    try:
        with Image.open(io.BytesIO(raw)) as img:
            img.seek(0)
            img.load()
            rgb = _to_rgb(img)
            pixels = np.array(rgb, dtype=np.uint8)
    except Exception as exc:  # PIL raises a zoo of types on bad input
        raise UndecodableImage(f"cannot decode image: {exc}") from exc
    return MemeInput(id=id, pixels=pixels, source_path=source_path)


@dataclass(frozen=True)
class CaptionResult:
    text: str
    backend_name: str


@dataclass(frozen=True)
class OcrSpan:
    text: str
    box: Box
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"span confidence must be in [0, 1], got {self.confidence}")
        x, y, w, h = self.box
        if w < 0 or h < 0:
            raise ValueError(f"span box has negative size: {self.box}")


def box_within(box: Box, width: int, height: int) -> bool:
    x, y, w, h = box
    return x >= 0 and y >= 0 and x + w <= width and y + h <= height


@dataclass(frozen=True)
class OcrOutcome:
    text: str
    confidence: float
    engine: Engine
    spans: Tuple[OcrSpan, ...] = ()
    degraded: bool = False

    def __post_init__(self):
        object.__setattr__(self, "spans", tuple(self.spans))
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")
        if self.spans:
            if self.confidence != min(s.confidence for s in self.spans):
                raise ValueError("confidence must equal the minimum span confidence")
        elif self.text or self.confidence != 0.0:
            raise ValueError("an outcome without spans must be ('', 0.0)")

    @classmethod
    def empty(cls, engine: Engine) -> "OcrOutcome":
        return cls(text="", confidence=0.0, engine=engine)

    @classmethod
    def from_spans(
        cls, spans: Sequence[OcrSpan], engine: Engine, width: int, height: int
    ) -> "OcrOutcome":
        """Assemble spans in reading order (top edge, then left edge).

        Scalar confidence is the minimum span confidence.
        """
        for s in spans:
            if not box_within(s.box, width, height):
                raise ValueError(f"span box {s.box} outside {width}x{height} image")
        if not spans:
            return cls.empty(engine)
        ordered = tuple(sorted(spans, key=lambda s: (s.box[1], s.box[0])))
        text = " ".join(s.text.strip() for s in ordered if s.text.strip())
        conf = min(s.confidence for s in ordered)
        return cls(text=text, confidence=conf, engine=engine, spans=ordered)

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "confidence": self.confidence,
            "engine": self.engine.value,
            "degraded": self.degraded,
            "spans": [
                {"text": s.text, "box": list(s.box), "conf": s.confidence} for s in self.spans
            ],
        }


@dataclass(frozen=True)
class LanguageTag:
    value: Language
    tamil_char_fraction: float

    def __post_init__(self):
        if not 0.0 <= self.tamil_char_fraction <= 1.0:
            raise ValueError("tamil_char_fraction must be in [0, 1]")


def yes_probability(logit_yes: float, logit_no: float, temperature: float) -> float:
    """Two-way softmax of temperature-scaled logits, P("Yes").

    Written as a logistic of the scaled margin, which is the max-subtracted
    softmax with the larger exponent factored out; it never overflows.
    """
    if not temperature > 0:
        raise NonpositiveTemperature(f"temperature must be > 0, got {temperature}")
    margin = (logit_yes - logit_no) / temperature
    if margin >= 0:
        return 1.0 / (1.0 + math.exp(-margin))
    z = math.exp(margin)
    return z / (1.0 + z)


@dataclass(frozen=True)
class HarmScore:
    logit_yes: float
    logit_no: float
    temperature: float
    probability: float

    def __post_init__(self):
        if not (math.isfinite(self.logit_yes) and math.isfinite(self.logit_no)):
            raise ValueError("logits must be finite")
        if not self.temperature > 0:
            raise NonpositiveTemperature(f"temperature must be > 0, got {self.temperature}")
        # saturates to exactly 0 or 1 in float for huge scaled margins
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("probability must be in [0, 1]")
        expected = yes_probability(self.logit_yes, self.logit_no, self.temperature)
        if abs(self.probability - expected) > 1e-12:
            raise ValueError("probability does not match the logits and temperature")

    @classmethod
    def from_logits(cls, logit_yes: float, logit_no: float, temperature: float = 1.0) -> "HarmScore":
        p = yes_probability(logit_yes, logit_no, temperature)
        return cls(float(logit_yes), float(logit_no), float(temperature), p)


def decide_label(probability: float, threshold: float = DEFAULT_DECISION_THRESHOLD) -> int:
    return int(probability > threshold)


@dataclass(frozen=True)
class PipelineResult:
    meme_id: str
    caption: CaptionResult
    ocr: OcrOutcome
    language: LanguageTag
    translated_text: Optional[str]
    score: HarmScore
    label: int
    threshold: float = field(default=DEFAULT_DECISION_THRESHOLD)

    def __post_init__(self):
        is_tamil = self.language.value is Language.TAMIL
        if is_tamil != (self.translated_text is not None):
            raise ValueError("translated_text must be present iff the language is TAMIL")
        if self.label != decide_label(self.score.probability, self.threshold):
            raise ValueError("label disagrees with probability and threshold")

    @property
    def probability(self) -> float:
        return self.score.probability

    @property
    def text(self) -> str:
        return self.translated_text if self.translated_text is not None else self.ocr.text

    def to_dict(self) -> dict:
        return {
            "id": self.meme_id,
            "probability": self.score.probability,
            "label": self.label,
            "caption": self.caption.text,
            "text": self.ocr.text,
            "language": self.language.value.value,
            "translated_text": self.translated_text,
            "ocr_engine": self.ocr.engine.value,
            "ocr_confidence": self.ocr.confidence,
            "logit_yes": self.score.logit_yes,
            "logit_no": self.score.logit_no,
            "temperature": self.score.temperature,
        }
