"""Application configuration: YAML file, embedded defaults, env overrides.

An empty file (or no file) is a valid configuration that wires every role to
a mock backend. Any scalar setting can be overridden from the environment as
``OSPC_<SECTION>_<KEY>``, e.g. ``OSPC_SCORER_TEMPERATURE=0.7`` or
``OSPC_OCR_CONFIDENCE_THRESHOLD=0.85``. Backend fields use
``OSPC_BACKENDS_<ROLE>_<FIELD>``, e.g. ``OSPC_BACKENDS_CHAT_LLM_ENDPOINT``.
Environment values win over the file.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import yaml

from .backends.base import BackendDescriptor, BackendSet, Role
from .backends.http import HttpCaptioner, HttpChatLLM, HttpOcrEngine, HttpTranslator
from .backends.mock import MockAnnotator, MockCaptioner, MockChatLLM, MockOcrEngine, MockTranslator
from .classify.language import DEFAULT_TAMIL_THRESHOLD
from .classify.prompt import PromptTemplate, load_template
from .classify.scoring import DEFAULT_TEMPERATURE, ClassifyConfig
from .core import DEFAULT_DECISION_THRESHOLD, Language
from .errors import BackendTimeout, BackendUnavailable, ConfigError, MemeScreenError
from .ocr_cascade import DEFAULT_CONFIDENCE_THRESHOLD, CascadeConfig
from .pipeline import PipelineConfig

ENV_PREFIX = "OSPC_"

ROLE_KEYS = {
    "captioner": Role.CAPTIONER,
    "ocr_primary": Role.OCR_PRIMARY,
    "ocr_fallback": Role.OCR_FALLBACK,
    "translator": Role.TRANSLATOR,
    "chat_llm": Role.CHAT_LLM,
    "vision_annotator": Role.VISION_ANNOTATOR,
}


@dataclass
class BackendConfig:
    kind: str = "mock"
    name: str = ""
    endpoint: Optional[str] = None
    timeout: Optional[float] = None
    retries: int = 0
    options: dict = field(default_factory=dict)


@dataclass
class OcrSection:
    confidence_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD


@dataclass
class ScorerSection:
    temperature: float = DEFAULT_TEMPERATURE
    decision_threshold: float = DEFAULT_DECISION_THRESHOLD


@dataclass
class LanguageSection:
    tamil_threshold: float = DEFAULT_TAMIL_THRESHOLD


@dataclass
class PromptSection:
    template_path: Optional[str] = None


@dataclass
class TimeoutSection:
    caption: float = 30.0
    ocr: float = 30.0
    translate: float = 15.0
    llm: float = 60.0
    annotator: float = 60.0


@dataclass
class ServiceSection:
    host: str = "127.0.0.1"
    port: int = 8000
    drain_timeout: float = 30.0


@dataclass
class DatagenSection:
    image_width: int = 512
    image_height: int = 512
    size_min: int = 12
    size_max: int = 48
    fonts: dict = field(default_factory=dict)
    background_endpoint: Optional[str] = None


def _default_backends() -> dict:
    return {key: BackendConfig() for key in ROLE_KEYS}


@dataclass
class AppConfig:
    backends: dict = field(default_factory=_default_backends)
    ocr: OcrSection = field(default_factory=OcrSection)
    scorer: ScorerSection = field(default_factory=ScorerSection)
    language: LanguageSection = field(default_factory=LanguageSection)
    prompt: PromptSection = field(default_factory=PromptSection)
    timeouts: TimeoutSection = field(default_factory=TimeoutSection)
    service: ServiceSection = field(default_factory=ServiceSection)
    datagen: DatagenSection = field(default_factory=DatagenSection)
    parallelism: int = 4

    def validate(self) -> "AppConfig":
        checks = [
            (0.0 <= self.ocr.confidence_threshold <= 1.0, "ocr.confidence_threshold must be in [0, 1]"),
            (self.scorer.temperature > 0, "scorer.temperature must be > 0"),
            (0.0 <= self.scorer.decision_threshold <= 1.0, "scorer.decision_threshold must be in [0, 1]"),
            (0.0 < self.language.tamil_threshold <= 1.0, "language.tamil_threshold must be in (0, 1]"),
            (self.parallelism >= 1, "parallelism must be >= 1"),
            (all(v > 0 for v in dataclasses.astuple(self.timeouts)), "timeouts must be positive"),
            (1 <= self.datagen.size_min <= self.datagen.size_max, "datagen size range is invalid"),
            (self.datagen.image_width >= 1 and self.datagen.image_height >= 1, "datagen image size must be positive"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        for key, b in self.backends.items():
            if key not in ROLE_KEYS:
                raise ConfigError(f"unknown backend role {key!r}")
            if b.kind not in ("mock", "http"):
                raise ConfigError(f"backends.{key}.kind must be 'mock' or 'http'")
            if b.kind == "http" and not b.endpoint:
                raise ConfigError(f"backends.{key} is an HTTP backend without an endpoint")
            if b.kind == "mock" and b.endpoint:
                raise ConfigError(f"backends.{key} is a mock backend but has an endpoint")
        for lang in self.datagen.fonts:
            if lang not in Language.__members__:
                raise ConfigError(f"datagen.fonts has unknown language {lang!r}")
        if self.prompt.template_path is not None:
            try:
                load_template(self.prompt.template_path)
            except OSError as exc:
                raise ConfigError(f"prompt template not readable: {exc}") from exc
            except MemeScreenError as exc:
                raise ConfigError(f"prompt template invalid: {exc}") from exc
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, allow_unicode=True)

    # derived runtime objects

    def template(self) -> PromptTemplate:
        return load_template(self.prompt.template_path)

    def pipeline_config(self) -> PipelineConfig:
        return PipelineConfig(
            cascade=CascadeConfig(self.ocr.confidence_threshold),
            classify=ClassifyConfig(
                temperature=self.scorer.temperature,
                tamil_threshold=self.language.tamil_threshold,
                template=self.template(),
            ),
            decision_threshold=self.scorer.decision_threshold,
        )

    def build_backends(self) -> BackendSet:
        return build_backends(self)


_SECTIONS = {
    "ocr": OcrSection,
    "scorer": ScorerSection,
    "language": LanguageSection,
    "prompt": PromptSection,
    "timeouts": TimeoutSection,
    "service": ServiceSection,
    "datagen": DatagenSection,
}


def _build(cls, data: Any, where: str):
    if data is None:
        return cls()
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where} must be a mapping")
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(names)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for k, v in data.items():
        kwargs[k] = _coerce(v, names[k], f"{where}.{k}")
    return cls(**kwargs)


_SCALARS = {"float": float, "int": int, "str": str}


def _coerce(value, f: dataclasses.Field, where: str):
    # annotations are strings here; Optional[...] wrappers are peeled off
    kind = str(f.type).replace("Optional[", "").rstrip("]")
    if value is None:
        if "Optional" not in str(f.type):
            raise ConfigError(f"{where} cannot be null")
        return None
    if kind == "dict":
        if not isinstance(value, Mapping):
            raise ConfigError(f"{where} must be a mapping")
        return dict(value)
    try:
        return _SCALARS[kind](value) if kind in _SCALARS else value
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def from_dict(data: Optional[Mapping]) -> AppConfig:
    data = dict(data or {})
    unknown = set(data) - set(_SECTIONS) - {"backends", "parallelism"}
    if unknown:
        raise ConfigError(f"unknown config sections {sorted(unknown)}")
    backends = _default_backends()
    for key, raw in (data.get("backends") or {}).items():
        if key not in ROLE_KEYS:
            raise ConfigError(f"unknown backend role {key!r}")
        backends[key] = _build(BackendConfig, raw, f"backends.{key}")
        if backends[key].options is None:
            backends[key].options = {}
    kwargs = {name: _build(cls, data.get(name), name) for name, cls in _SECTIONS.items()}
    try:
        parallelism = int(data.get("parallelism", 4))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"parallelism: {exc}") from exc
    return AppConfig(backends=backends, parallelism=parallelism, **kwargs).validate()


def env_keys() -> dict[str, tuple]:
    """Every supported environment variable and the config path it sets."""
    keys = {f"{ENV_PREFIX}PARALLELISM": ("parallelism",)}
    for name, cls in _SECTIONS.items():
        for f in dataclasses.fields(cls):
            if f.name == "fonts":
                continue
            keys[f"{ENV_PREFIX}{name.upper()}_{f.name.upper()}"] = (name, f.name)
    for role in ROLE_KEYS:
        for f in ("kind", "name", "endpoint", "timeout", "retries"):
            keys[f"{ENV_PREFIX}BACKENDS_{role.upper()}_{f.upper()}"] = ("backends", role, f)
    return keys


def apply_env(data: Optional[Mapping], environ: Optional[Mapping[str, str]] = None) -> dict:
    environ = os.environ if environ is None else environ
    out = _deepcopy(data or {})
    for var, path in env_keys().items():
        if var not in environ:
            continue
        node = out
        for part in path[:-1]:
            if not isinstance(node.get(part), dict):
                node[part] = {}
            node = node[part]
        node[path[-1]] = environ[var]
    return out


def _deepcopy(d):
    if isinstance(d, Mapping):
        return {k: _deepcopy(v) for k, v in d.items()}
    if isinstance(d, list):
        return [_deepcopy(v) for v in d]
    return d


def load_config(
    path: Optional[Union[str, Path]] = None, environ: Optional[Mapping[str, str]] = None
) -> AppConfig:
    data: Any = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
        if not isinstance(data, Mapping):
            raise ConfigError(f"config {path} must be a mapping at top level")
    return from_dict(apply_env(data, environ))


def parse_config(text: str) -> AppConfig:
    return from_dict(yaml.safe_load(text) or {})


_FAILURES = {"BACKEND_UNAVAILABLE": BackendUnavailable, "BACKEND_TIMEOUT": BackendTimeout}


def _mock_errors(opts: dict) -> dict:
    fail = opts.get("fail")
    errors = {}
    if fail:
        if fail not in _FAILURES:
            raise ConfigError(f"mock 'fail' must be one of {sorted(_FAILURES)}")
        errors["*"] = _FAILURES[fail](f"mock configured to fail with {fail}")
    for key, code in (opts.get("fail_on") or {}).items():
        errors[key] = _FAILURES[code](f"mock configured to fail on {key}")
    return errors


def _ocr_script(raw: Optional[Mapping]) -> dict:
    out = {}
    for k, v in (raw or {}).items():
        out[k] = tuple(v) if isinstance(v, list) and len(v) == 2 and isinstance(v[0], str) else v
    return out


def _mock(key: str, b: BackendConfig):
    opts = dict(b.options or {})
    common = {"errors": _mock_errors(opts), "reachable": bool(opts.get("reachable", True))}
    name = b.name or f"mock-{key.replace('_', '-')}"
    if key == "captioner":
        return MockCaptioner(opts.get("table"), name=name, **common)
    if key in ("ocr_primary", "ocr_fallback"):
        return MockOcrEngine(_ocr_script(opts.get("script")), name=name, **common)
    if key == "translator":
        return MockTranslator(opts.get("table"), name=name, **common)
    if key == "chat_llm":
        extra = {k: opts[k] for k in ("trigger_words", "seed", "max_prompt_chars") if k in opts}
        return MockChatLLM(scripted=opts.get("scripted"), table=opts.get("table"), name=name, **extra, **common)
    table = {k: tuple(v) if isinstance(v, list) else (v["verdict"], v.get("rationale", "")) for k, v in (opts.get("table") or {}).items()}
    return MockAnnotator(table, name=name, **common)


_TIMEOUT_FOR = {
    "captioner": "caption",
    "ocr_primary": "ocr",
    "ocr_fallback": "ocr",
    "translator": "translate",
    "chat_llm": "llm",
    "vision_annotator": "annotator",
}

_HTTP = {
    "captioner": HttpCaptioner,
    "ocr_primary": HttpOcrEngine,
    "ocr_fallback": HttpOcrEngine,
    "translator": HttpTranslator,
    "chat_llm": HttpChatLLM,
}


def build_backends(cfg: AppConfig, transport=None) -> BackendSet:
    built = {}
    for key, role in ROLE_KEYS.items():
        b = cfg.backends.get(key, BackendConfig())
        if b.kind == "mock":
            built[key] = _mock(key, b)
            continue
        if key not in _HTTP:
            raise ConfigError(f"no HTTP adapter for {key}; use a mock annotator")
        desc = BackendDescriptor(
            role=role,
            name=b.name or f"http-{key.replace('_', '-')}",
            endpoint=b.endpoint,
            timeout=b.timeout or getattr(cfg.timeouts, _TIMEOUT_FOR[key]),
            retries=b.retries,
        )
        built[key] = _HTTP[key](desc, transport=transport)
    return BackendSet(
        captioner=built["captioner"],
        ocr_primary=built["ocr_primary"],
        ocr_fallback=built["ocr_fallback"],
        translator=built["translator"],
        llm=built["chat_llm"],
        annotator=built["vision_annotator"],
    )
