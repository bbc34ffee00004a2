"""Harmful meme detection: caption + cascaded OCR + LLM Yes/No logit scoring."""

from .backends import BackendSet, mock_backends
from .classify import build_prompt, classify_meme, detect_language, harm_probability
from .core import (
    CaptionResult,
    Engine,
    HarmScore,
    Language,
    LanguageTag,
    MemeInput,
    OcrOutcome,
    OcrSpan,
    PipelineResult,
    Stage,
    validate_meme_input,
)
from .evalharness import EvalReport, LabeledPrediction, accuracy, auroc, evaluate, temperature_sweep
from .ocr_cascade import CascadeConfig, cascade_recognize
from .pipeline import BatchReport, PipelineConfig, score_batch, score_one

__version__ = "0.1.0"
