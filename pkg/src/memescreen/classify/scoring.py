from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Tuple

from ..backends.base import ChatLLM, NextTokenLogits, Translator
from ..core import CaptionResult, HarmScore, Language, LanguageTag, OcrOutcome, Stage
from ..errors import MissingCandidate, StageFailure
from .language import DEFAULT_TAMIL_THRESHOLD, detect_language
from .prompt import PromptTemplate, build_prompt

DEFAULT_TEMPERATURE = 1.0
YES, NO = "Yes", "No"


def harm_probability(
    logits: NextTokenLogits, temperature: float = DEFAULT_TEMPERATURE, yes: str = YES, no: str = NO
) -> HarmScore:
    """Turn the Yes/No next-token logits into a harm probability.

    P(harmful) = exp(yes/t) / (exp(yes/t) + exp(no/t)), evaluated without
    overflow for any finite logits and t > 0.
    """
    for cand in (yes, no):
        if cand not in logits:
            raise MissingCandidate(f"logits have no entry for {cand!r}")
    return HarmScore.from_logits(logits[yes], logits[no], temperature)


@dataclass(frozen=True)
class ClassifyConfig:
    temperature: float = DEFAULT_TEMPERATURE
    tamil_threshold: float = DEFAULT_TAMIL_THRESHOLD
    template: PromptTemplate = field(default_factory=PromptTemplate.default)
    candidates: Tuple[str, str] = (YES, NO)

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError("temperature must be > 0")
        if not 0.0 < self.tamil_threshold <= 1.0:
            raise ValueError("tamil_threshold must be in (0, 1]")


@dataclass(frozen=True)
class Classification:
    language: LanguageTag
    translated_text: Optional[str]
    score: HarmScore
    prompt: str
    timing: dict = field(default_factory=dict, compare=False)


def classify_meme(
    caption: CaptionResult,
    ocr: OcrOutcome,
    translator: Translator,
    llm: ChatLLM,
    cfg: ClassifyConfig = ClassifyConfig(),
) -> Classification:
    """Route, prompt and score one meme.

    Tamil OCR text is translated exactly once and the translation fills the
    prompt; any other text goes in unmodified. Backend errors come back as
    ``StageFailure`` naming TRANSLATE or SCORE.
    """
    timing = {}
    tag = detect_language(ocr.text, cfg.tamil_threshold)
    translated = None
    if tag.value is Language.TAMIL:
        t0 = time.perf_counter()
        try:
            translated = translator.translate(ocr.text, tag)
        except Exception as exc:
            raise StageFailure(Stage.TRANSLATE, exc) from exc
        timing[Stage.TRANSLATE] = time.perf_counter() - t0
    prompt = build_prompt(caption.text, translated if translated is not None else ocr.text, cfg.template)
    t0 = time.perf_counter()
    try:
        logits = llm.next_token_logits(prompt, list(cfg.candidates))
        score = harm_probability(logits, cfg.temperature, *cfg.candidates)
    except Exception as exc:
        raise StageFailure(Stage.SCORE, exc) from exc
    timing[Stage.SCORE] = time.perf_counter() - t0
    return Classification(tag, translated, score, prompt, timing)
