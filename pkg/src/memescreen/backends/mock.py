"""Deterministic, scriptable stand-ins for every backend role.

Mocks look up scripted entries by meme id first and image content hash
second, so tests can script either a specific meme or a specific raster.
Outputs depend only on the inputs and the constructor arguments; the call
counters exist for assertions and never influence results.
"""

from __future__ import annotations

import hashlib
import re
import struct
import threading
from typing import Iterable, Mapping, Optional, Sequence, Union

from ..core import CaptionResult, Engine, Language, LanguageTag, MemeInput, OcrOutcome, OcrSpan
from ..errors import PromptTooLong, UnsupportedSource
from .base import AnnotatorVerdict, NextTokenLogits, check_candidates

# none of these occur in the bias-taxonomy prompt, so a prompt built from
# benign caption/text scores at the floor of the default rule
DEFAULT_TRIGGER_WORDS = (
    "hate",
    "stupid",
    "inferior",
    "disgusting",
    "terrorist",
    "lazy",
    "vermin",
    "useless",
    "dirty",
    "go back",
)

_SUBJECTS = ("man", "woman", "cat", "dog", "crowd", "child", "car", "building", "bird", "table")
_SCENES = (
    "in a park",
    "on a street",
    "in a kitchen",
    "at a beach",
    "in an office",
    "on a stage",
    "in a classroom",
    "at night",
)


class _Counter:
    def __init__(self):
        self._lock = threading.Lock()
        self._n = 0

    def tick(self) -> None:
        with self._lock:
            self._n += 1

    @property
    def value(self) -> int:
        return self._n

    def reset(self) -> None:
        with self._lock:
            self._n = 0


class _MockBase:
    def __init__(self, name: str, errors: Optional[Mapping[str, Exception]] = None, reachable: bool = True):
        self.name = name
        self.errors = dict(errors or {})
        self.reachable = reachable
        self._counter = _Counter()

    @property
    def calls(self) -> int:
        return self._counter.value

    def reset_calls(self) -> None:
        self._counter.reset()

    def ping(self) -> bool:
        return self.reachable

    def _raise_scripted(self, *keys: str) -> None:
        for key in keys:
            if key in self.errors:
                raise self.errors[key]
        if "*" in self.errors:
            raise self.errors["*"]


def _lookup(table: Mapping, image: MemeInput):
    if image.id in table:
        return table[image.id]
    return table.get(image.content_hash)


class MockCaptioner(_MockBase):
    """Caption from a table, else a phrase picked by the image hash."""

    def __init__(self, table: Optional[Mapping[str, str]] = None, name: str = "mock-captioner", **kw):
        super().__init__(name, **kw)
        self.table = dict(table or {})

    def caption(self, image: MemeInput) -> CaptionResult:
        self._counter.tick()
        self._raise_scripted(image.id, image.content_hash)
        text = _lookup(self.table, image)
        if text is None:
            h = int(image.content_hash[:16], 16)
            text = f"a photo of a {_SUBJECTS[h % len(_SUBJECTS)]} {_SCENES[(h >> 8) % len(_SCENES)]}"
        return CaptionResult(text=text, backend_name=self.name)


ScriptEntry = Union[tuple, Mapping, Sequence[OcrSpan]]


class MockOcrEngine(_MockBase):
    """Scripted OCR engine.

    A script entry is ``(text, conf)``, ``{"text": ..., "conf": ...}``,
    ``{"spans": [{"text", "conf", "box"}]}`` or a list of ``OcrSpan``.
    A bare text entry is reported as one span covering the whole image.
    Unscripted images yield ``("", 0.0)``.
    """

    def __init__(self, script: Optional[Mapping[str, ScriptEntry]] = None, name: str = "mock-ocr", **kw):
        super().__init__(name, **kw)
        self.script = dict(script or {})

    def recognize(self, image: MemeInput, engine: Engine) -> OcrOutcome:
        self._counter.tick()
        self._raise_scripted(image.id, image.content_hash)
        entry = _lookup(self.script, image)
        if entry is None:
            return OcrOutcome.empty(engine)
        spans = _entry_spans(entry, image)
        return OcrOutcome.from_spans(spans, engine, image.width, image.height)


def _entry_spans(entry: ScriptEntry, image: MemeInput) -> list[OcrSpan]:
    full = (0, 0, image.width, image.height)
    if isinstance(entry, tuple) and len(entry) == 2 and isinstance(entry[0], str):
        text, conf = entry
        return [OcrSpan(text, full, float(conf))] if text or conf else []
    if isinstance(entry, Mapping):
        if "spans" in entry:
            return [
                OcrSpan(s["text"], tuple(s.get("box", full)), float(s["conf"])) for s in entry["spans"]
            ]
        text, conf = entry.get("text", ""), float(entry.get("conf", 0.0))
        return [OcrSpan(text, full, conf)] if text or conf else []
    return [s if isinstance(s, OcrSpan) else OcrSpan(*s) for s in entry]


_ESCAPED_PREFIX = "translated:"


class MockTranslator(_MockBase):
    """Tamil-to-English stand-in.

    Table hits are returned verbatim. Anything else maps to an ASCII
    escape of the input, which :meth:`reverse` undoes exactly.
    """

    def __init__(self, table: Optional[Mapping[str, str]] = None, name: str = "mock-translator", **kw):
        super().__init__(name, **kw)
        self.table = dict(table or {})

    def translate(self, text: str, source: LanguageTag) -> str:
        self._counter.tick()
        if source.value is not Language.TAMIL:
            raise UnsupportedSource(f"only TAMIL sources are supported, got {source.value.value}")
        self._raise_scripted(text)
        if text == "":
            return ""
        if text in self.table:
            return self.table[text]
        return _ESCAPED_PREFIX + text.encode("unicode_escape").decode("ascii")

    @staticmethod
    def reverse(translated: str) -> str:
        if not translated.startswith(_ESCAPED_PREFIX):
            raise ValueError("not produced by the escape mapping")
        return translated[len(_ESCAPED_PREFIX):].encode("ascii").decode("unicode_escape")


def _word_pattern(word: str) -> re.Pattern:
    return re.compile(r"(?<!\w)" + re.escape(word.lower()) + r"(?!\w)")


class MockChatLLM(_MockBase):
    """Next-token logits without a model.

    Resolution order: exact prompt in ``table``, then ``scripted`` logits
    (same for every prompt), then the default rule. The default rule gives
    ``Yes`` a logit of ``4 * f - 2`` and ``No`` its negation, where ``f`` is
    the fraction of trigger words found in the prompt. Other candidates get
    a seeded hash of (prompt, candidate) in [-2, 2].
    """

    def __init__(
        self,
        scripted: Optional[Mapping[str, float]] = None,
        table: Optional[Mapping[str, Mapping[str, float]]] = None,
        trigger_words: Iterable[str] = DEFAULT_TRIGGER_WORDS,
        seed: int = 0,
        max_prompt_chars: int = 32768,
        name: str = "mock-llm",
        **kw,
    ):
        super().__init__(name, **kw)
        self.scripted = dict(scripted) if scripted is not None else None
        self.table = {k: dict(v) for k, v in (table or {}).items()}
        self.trigger_words = tuple(trigger_words)
        self._patterns = [_word_pattern(w) for w in self.trigger_words]
        self.seed = int(seed)
        self.max_prompt_chars = max_prompt_chars

    def trigger_fraction(self, prompt: str) -> float:
        if not self._patterns:
            return 0.0
        low = prompt.lower()
        return sum(1 for p in self._patterns if p.search(low)) / len(self._patterns)

    def _hashed(self, prompt: str, candidate: str) -> float:
        h = hashlib.blake2b(digest_size=8, key=struct.pack("<q", self.seed))
        h.update(prompt.encode("utf-8"))
        h.update(b"\x00")
        h.update(candidate.encode("utf-8"))
        u = int.from_bytes(h.digest(), "little") / 2.0**64
        return 4.0 * u - 2.0

    def _rule(self, prompt: str, candidate: str) -> float:
        if candidate in ("Yes", "No"):
            v = 4.0 * self.trigger_fraction(prompt) - 2.0
            return v if candidate == "Yes" else -v
        return self._hashed(prompt, candidate)

    def next_token_logits(self, prompt: str, candidates: Sequence[str]) -> NextTokenLogits:
        self._counter.tick()
        cands = check_candidates(candidates)
        if len(prompt) > self.max_prompt_chars:
            raise PromptTooLong(f"prompt has {len(prompt)} chars, limit {self.max_prompt_chars}")
        self._raise_scripted(prompt)
        source = self.table.get(prompt, self.scripted)
        out = {}
        for c in cands:
            if source is not None and c in source:
                out[c] = float(source[c])
            else:
                out[c] = self._rule(prompt, c)
        return NextTokenLogits(out)


class MockAnnotator(_MockBase):
    """Scripted vision annotator; unscripted memes get ``default``."""

    def __init__(
        self,
        table: Optional[Mapping[str, Union[AnnotatorVerdict, tuple]]] = None,
        default: Optional[AnnotatorVerdict] = None,
        name: str = "mock-annotator",
        **kw,
    ):
        super().__init__(name, **kw)
        self.table = dict(table or {})
        self.default = default if default is not None else AnnotatorVerdict("No", "")

    def annotate(self, image: MemeInput) -> AnnotatorVerdict:
        self._counter.tick()
        self._raise_scripted(image.id, image.content_hash)
        entry = _lookup(self.table, image)
        if entry is None:
            return self.default
        if isinstance(entry, AnnotatorVerdict):
            return entry
        return AnnotatorVerdict(*entry)


def mock_backends(
    captions: Optional[Mapping[str, str]] = None,
    primary: Optional[Mapping[str, ScriptEntry]] = None,
    fallback: Optional[Mapping[str, ScriptEntry]] = None,
    translations: Optional[Mapping[str, str]] = None,
    logits: Optional[Mapping[str, float]] = None,
    annotations: Optional[Mapping] = None,
):
    """A full mock ``BackendSet``; every argument is optional."""
    from .base import BackendSet

    return BackendSet(
        captioner=MockCaptioner(captions),
        ocr_primary=MockOcrEngine(primary, name="mock-ocr-primary"),
        ocr_fallback=MockOcrEngine(fallback, name="mock-ocr-fallback"),
        translator=MockTranslator(translations),
        llm=MockChatLLM(scripted=logits),
        annotator=MockAnnotator(annotations),
    )
