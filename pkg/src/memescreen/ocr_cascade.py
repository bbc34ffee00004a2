"""Two-engine OCR with a confidence gate.

The primary engine's result is kept only when its confidence is strictly
above the gate. Otherwise the fallback engine runs and its result is used
whatever its own confidence.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass

from .backends.base import OcrEngine
from .core import Engine, MemeInput, OcrOutcome
from .errors import BackendError

log = logging.getLogger(__name__)

DEFAULT_CONFIDENCE_THRESHOLD = 0.9


@dataclass(frozen=True)
class CascadeConfig:
    confidence_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD

    def __post_init__(self):
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise ValueError(f"confidence_threshold must be in [0, 1], got {self.confidence_threshold}")


def needs_fallback(confidence: float, threshold: float) -> bool:
    return not confidence > threshold


def cascade_recognize(
    image: MemeInput,
    primary: OcrEngine,
    fallback: OcrEngine,
    cfg: CascadeConfig = CascadeConfig(),
) -> OcrOutcome:
    """Run the primary engine, and the fallback when the gate is not cleared.

    A primary failure propagates. A fallback failure propagates too, unless
    the primary produced some text; then the primary outcome is returned
    with ``degraded=True``.
    """
    first = primary.recognize(image, Engine.PRIMARY)
    if not needs_fallback(first.confidence, cfg.confidence_threshold):
        return first
    try:
        return fallback.recognize(image, Engine.FALLBACK)
    except BackendError as exc:
        if not first.text:
            raise
        log.warning("fallback OCR failed for %s (%s); keeping primary result", image.id, exc.code)
        return dataclasses.replace(first, degraded=True)
