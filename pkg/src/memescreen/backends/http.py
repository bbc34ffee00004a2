"""JSON-over-POST adapters for remote inference servers.

Wire contract (request => response):

    caption    {"image_b64"}                => {"caption"}
    ocr        {"image_b64"}                => {"spans": [{"text", "conf", "box": [x, y, w, h]}]}
    translate  {"text", "src"}              => {"text"}
    logits     {"prompt", "candidates": []} => {"logits": {candidate: value}}

Transport failures, timeouts and 5xx responses are retried up to the
descriptor's retry budget. 4xx responses and malformed bodies fail at once.
Every failure surfaces as a typed ``BackendError``.
"""

from __future__ import annotations

import base64
import logging
import math
from typing import Optional, Sequence

import httpx

from ..core import CaptionResult, Engine, Language, LanguageTag, MemeInput, OcrOutcome, OcrSpan
from ..errors import BackendTimeout, BackendUnavailable, PromptTooLong, UnsupportedSource
from .base import BackendDescriptor, NextTokenLogits, check_candidates

log = logging.getLogger(__name__)

LANGUAGE_CODES = {Language.TAMIL: "ta", Language.ENGLISH: "en", Language.CHINESE: "zh", Language.MALAY: "ms"}


class HttpBackend:
    def __init__(self, descriptor: BackendDescriptor, transport: Optional[httpx.BaseTransport] = None):
        if not descriptor.endpoint:
            raise ValueError(f"{descriptor.role.value} HTTP adapter needs an endpoint")
        self.descriptor = descriptor
        self.name = descriptor.name
        # httpx.Client pools connections and is safe to share across threads
        self._client = httpx.Client(timeout=descriptor.timeout, transport=transport)

    def close(self) -> None:
        self._client.close()

    def ping(self) -> bool:
        try:
            self._client.get(self.descriptor.endpoint, timeout=min(self.descriptor.timeout, 5.0))
        except httpx.HTTPError:
            return False
        return True

    def _post(self, payload: dict) -> dict:
        url = self.descriptor.endpoint
        attempts = 1 + self.descriptor.retries
        last: Exception = BackendUnavailable(f"{self.name}: no attempt made")
        for attempt in range(attempts):
            try:
                resp = self._client.post(url, json=payload)
            except httpx.TimeoutException as exc:
                last = BackendTimeout(f"{self.name}: timed out after {self.descriptor.timeout}s", url=url)
                last.__cause__ = exc
            except httpx.HTTPError as exc:
                last = BackendUnavailable(f"{self.name}: {type(exc).__name__}: {exc}", url=url)
                last.__cause__ = exc
            else:
                if resp.status_code == 413:
                    raise PromptTooLong(f"{self.name}: request too large (413)", url=url)
                if 400 <= resp.status_code < 500:
                    raise BackendUnavailable(f"{self.name}: HTTP {resp.status_code}: {resp.text[:200]}", url=url)
                if resp.status_code >= 500:
                    last = BackendUnavailable(f"{self.name}: HTTP {resp.status_code}", url=url)
                else:
                    try:
                        body = resp.json()
                    except ValueError as exc:
                        raise BackendUnavailable(f"{self.name}: response is not JSON", url=url) from exc
                    if not isinstance(body, dict):
                        raise BackendUnavailable(f"{self.name}: response is not a JSON object", url=url)
                    return body
            if attempt + 1 < attempts:
                log.debug("%s: attempt %d/%d failed: %s", self.name, attempt + 1, attempts, last)
        raise last

    def _field(self, body: dict, key: str, kind):
        if key not in body or not isinstance(body[key], kind):
            raise BackendUnavailable(f"{self.name}: response missing {key!r}: {str(body)[:200]}")
        return body[key]


def _b64(image: MemeInput) -> str:
    return base64.b64encode(image.to_png()).decode("ascii")


class HttpCaptioner(HttpBackend):
    def caption(self, image: MemeInput) -> CaptionResult:
        body = self._post({"image_b64": _b64(image)})
        return CaptionResult(text=self._field(body, "caption", str), backend_name=self.name)


def _clip_box(box, width: int, height: int) -> tuple[int, int, int, int]:
    x, y, w, h = (int(round(float(v))) for v in box)
    x0, y0 = min(max(x, 0), width), min(max(y, 0), height)
    x1, y1 = min(max(x + w, x0), width), min(max(y + h, y0), height)
    return (x0, y0, x1 - x0, y1 - y0)


class HttpOcrEngine(HttpBackend):
    def recognize(self, image: MemeInput, engine: Engine) -> OcrOutcome:
        body = self._post({"image_b64": _b64(image)})
        raw = self._field(body, "spans", list)
        spans = []
        try:
            for s in raw:
                conf = min(max(float(s["conf"]), 0.0), 1.0)
                spans.append(OcrSpan(str(s["text"]), _clip_box(s["box"], image.width, image.height), conf))
        except (KeyError, TypeError, ValueError) as exc:
            raise BackendUnavailable(f"{self.name}: malformed span: {exc}") from exc
        return OcrOutcome.from_spans(spans, engine, image.width, image.height)


class HttpTranslator(HttpBackend):
    def translate(self, text: str, source: LanguageTag) -> str:
        if source.value is not Language.TAMIL:
            raise UnsupportedSource(f"only TAMIL sources are supported, got {source.value.value}")
        if text == "":
            return ""
        body = self._post({"text": text, "src": LANGUAGE_CODES[source.value]})
        return self._field(body, "text", str)


class HttpChatLLM(HttpBackend):
    def next_token_logits(self, prompt: str, candidates: Sequence[str]) -> NextTokenLogits:
        cands = check_candidates(candidates)
        body = self._post({"prompt": prompt, "candidates": cands})
        logits = self._field(body, "logits", dict)
        missing = [c for c in cands if c not in logits]
        if missing:
            raise BackendUnavailable(f"{self.name}: logits missing candidates {missing}", missing=missing)
        out = {}
        for c in cands:
            try:
                v = float(logits[c])
            except (TypeError, ValueError) as exc:
                raise BackendUnavailable(f"{self.name}: logit for {c!r} is not a number") from exc
            if not math.isfinite(v):
                raise BackendUnavailable(f"{self.name}: logit for {c!r} is not finite")
            out[c] = v
        return NextTokenLogits(out)
