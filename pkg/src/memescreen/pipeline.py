"""End-to-end scoring: caption and OCR cascade, then routing and scoring.

Caption and OCR are independent, so the caption runs on a shared stage pool
while the item's own thread does OCR. Batches fan out over a worker pool;
results come back in input order however the work was scheduled.
"""

from __future__ import annotations

import csv
import io
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Optional, Sequence, Union

from .backends.base import BackendSet
from .classify.scoring import ClassifyConfig, classify_meme
from .core import DEFAULT_DECISION_THRESHOLD, MemeInput, PipelineResult, Stage, decide_label
from .errors import DuplicateId, StageFailure
from .ocr_cascade import CascadeConfig, cascade_recognize

PREDICTION_HEADER = ("id", "probability", "label")

_stage_pool: Optional[ThreadPoolExecutor] = None
_stage_pool_lock = threading.Lock()


def _shared_stage_pool() -> ThreadPoolExecutor:
    global _stage_pool
    with _stage_pool_lock:
        if _stage_pool is None:
            _stage_pool = ThreadPoolExecutor(max_workers=32, thread_name_prefix="memescreen-caption")
        return _stage_pool


@dataclass(frozen=True)
class PipelineConfig:
    cascade: CascadeConfig = field(default_factory=CascadeConfig)
    classify: ClassifyConfig = field(default_factory=ClassifyConfig)
    decision_threshold: float = DEFAULT_DECISION_THRESHOLD

    def __post_init__(self):
        if not 0.0 <= self.decision_threshold <= 1.0:
            raise ValueError("decision_threshold must be in [0, 1]")


@dataclass(frozen=True)
class BatchFailure:
    meme_id: str
    stage: str
    error: str
    message: str

    def to_dict(self) -> dict:
        return {"id": self.meme_id, "stage": self.stage, "error": self.error, "message": self.message}


@dataclass
class StageTiming:
    total_s: float = 0.0
    count: int = 0
    max_s: float = 0.0

    def add(self, seconds: float) -> None:
        self.total_s += seconds
        self.count += 1
        self.max_s = max(self.max_s, seconds)


@dataclass
class BatchReport:
    results: list
    failures: list
    timing: dict
    size: int = 0

    def __post_init__(self):
        if len(self.results) + len(self.failures) != self.size:
            raise ValueError("results and failures must account for every input")

    def write_predictions(self, dest: Union[str, IO[str]]) -> None:
        write_predictions(self.results, dest)


def _timed(fn, *args):
    t0 = time.perf_counter()
    return fn(*args), time.perf_counter() - t0


def _run(meme: MemeInput, backends: BackendSet, cfg: PipelineConfig, pool) -> tuple[PipelineResult, dict]:
    timing: dict = {}
    caption_future = pool.submit(_timed, backends.captioner.caption, meme)
    ocr = ocr_error = None
    t0 = time.perf_counter()
    try:
        ocr = cascade_recognize(meme, backends.ocr_primary, backends.ocr_fallback, cfg.cascade)
    except Exception as exc:
        ocr_error = exc
    timing[Stage.OCR] = time.perf_counter() - t0
    try:
        caption, timing[Stage.CAPTION] = caption_future.result()
    except Exception as exc:
        raise StageFailure(Stage.CAPTION, exc) from exc
    if ocr_error is not None:
        raise StageFailure(Stage.OCR, ocr_error) from ocr_error

    cls = classify_meme(caption, ocr, backends.translator, backends.llm, cfg.classify)
    timing.update(cls.timing)
    result = PipelineResult(
        meme_id=meme.id,
        caption=caption,
        ocr=ocr,
        language=cls.language,
        translated_text=cls.translated_text,
        score=cls.score,
        label=decide_label(cls.score.probability, cfg.decision_threshold),
        threshold=cfg.decision_threshold,
    )
    return result, timing


def score_one(meme: MemeInput, backends: BackendSet, cfg: PipelineConfig = PipelineConfig()) -> PipelineResult:
    """Score a single meme; stage errors raise ``StageFailure``."""
    result, _ = _run(meme, backends, cfg, _shared_stage_pool())
    return result


def _check_unique(inputs: Sequence[MemeInput]) -> None:
    seen = set()
    for m in inputs:
        if m.id in seen:
            raise DuplicateId(f"duplicate meme id {m.id!r}", id=m.id)
        seen.add(m.id)


def _isolated(meme, backends, cfg, pool):
    try:
        return _run(meme, backends, cfg, pool)
    except StageFailure as exc:
        return BatchFailure(meme.id, exc.stage.value, exc.cause_code, str(exc.cause)), {}
    except Exception as exc:
        code = getattr(exc, "code", type(exc).__name__)
        return BatchFailure(meme.id, "PIPELINE", code, str(exc)), {}


def iter_batch(
    inputs: Sequence[MemeInput],
    backends: BackendSet,
    cfg: PipelineConfig = PipelineConfig(),
    parallelism: int = 1,
) -> Iterator[tuple]:
    """Yield ``(PipelineResult | BatchFailure, stage_timing)`` in input order.

    Items are yielded as soon as they and all earlier items are done.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    inputs = list(inputs)
    _check_unique(inputs)
    pool = _shared_stage_pool()
    with ThreadPoolExecutor(max_workers=parallelism, thread_name_prefix="memescreen-item") as ex:
        futures = [ex.submit(_isolated, m, backends, cfg, pool) for m in inputs]
        for fut in futures:
            yield fut.result()


def score_batch(
    inputs: Sequence[MemeInput],
    backends: BackendSet,
    cfg: PipelineConfig = PipelineConfig(),
    parallelism: int = 1,
) -> BatchReport:
    inputs = list(inputs)
    results, failures = [], []
    timing = {s: StageTiming() for s in Stage}
    for outcome, t in iter_batch(inputs, backends, cfg, parallelism):
        (failures if isinstance(outcome, BatchFailure) else results).append(outcome)
        for stage, seconds in t.items():
            timing[stage].add(seconds)
    return BatchReport(results=results, failures=failures, timing=timing, size=len(inputs))


def prediction_row(result: PipelineResult) -> list[str]:
    return [result.meme_id, f"{result.score.probability:.6f}", str(result.label)]


class PredictionWriter:
    """Streams ``id,probability,label`` rows to a text handle."""

    def __init__(self, handle: IO[str]):
        self._writer = csv.writer(handle, lineterminator="\n")
        self._writer.writerow(PREDICTION_HEADER)
        self._handle = handle

    def write(self, result: PipelineResult) -> None:
        self._writer.writerow(prediction_row(result))
        self._handle.flush()


def write_predictions(results: Iterable[PipelineResult], dest: Union[str, IO[str]]) -> None:
    if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            write_predictions(results, fh)
        return
    w = PredictionWriter(dest)
    for r in results:
        w.write(r)


def predictions_csv(results: Iterable[PipelineResult]) -> str:
    buf = io.StringIO()
    write_predictions(results, buf)
    return buf.getvalue()
