"""Per-script font registry with glyph-coverage checks."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Sequence

from fontTools.ttLib import TTFont
from PIL import ImageFont

from ..core import Language
from ..errors import NoFontForScript

SYNTH_LANGUAGES = (Language.ENGLISH, Language.CHINESE, Language.MALAY, Language.TAMIL)

_BUNDLED = {
    Language.ENGLISH: ("DejaVuSans-Latin.ttf", "DejaVuSans-Bold-Latin.ttf", "DejaVuSerif-Latin.ttf"),
    Language.MALAY: ("DejaVuSans-Latin.ttf", "DejaVuSans-Bold-Latin.ttf", "DejaVuSerif-Latin.ttf"),
    Language.CHINESE: ("NotoSansSC-Regular-GB2312L1.ttf",),
    Language.TAMIL: ("NotoSansTamil-Regular.ttf", "NotoSansTamil-Bold.ttf"),
}


@dataclass(frozen=True)
class FontSpec:
    font_id: str
    path: str


@lru_cache(maxsize=None)
def _codepoints(path: str) -> frozenset:
    with TTFont(path, lazy=True) as tt:
        return frozenset(tt.getBestCmap())


def covers(spec: FontSpec, text: str) -> bool:
    cps = _codepoints(spec.path)
    return all(ord(ch) in cps for ch in text if not ch.isspace())


_local = threading.local()


def load_font(spec: FontSpec, size: int) -> ImageFont.FreeTypeFont:
    # FreeType faces are not shared across threads
    cache = getattr(_local, "fonts", None)
    if cache is None:
        cache = _local.fonts = {}
    key = (spec.path, size)
    if key not in cache:
        cache[key] = ImageFont.truetype(spec.path, size)
    return cache[key]


class FontRegistry:
    def __init__(self, fonts: Optional[Mapping[Language, Sequence[FontSpec]]] = None):
        self._fonts = {lang: list(specs) for lang, specs in (fonts or {}).items()}

    def register(self, language: Language, path, font_id: Optional[str] = None) -> FontSpec:
        spec = FontSpec(font_id or Path(path).stem, str(path))
        self._fonts.setdefault(language, []).append(spec)
        return spec

    def fonts(self, language: Language) -> list[FontSpec]:
        return list(self._fonts.get(language, ()))

    def fonts_for(self, language: Language, text: str) -> list[FontSpec]:
        """Registered fonts for ``language`` that have a glyph for every character."""
        usable = [f for f in self._fonts.get(language, ()) if covers(f, text)]
        if not usable:
            raise NoFontForScript(f"no registered {language.value} font covers {text[:40]!r}")
        return usable

    def to_dict(self) -> dict:
        return {lang.value: [s.path for s in specs] for lang, specs in self._fonts.items()}


def bundled_font_dir() -> Path:
    return Path(str(resources.files("memescreen").joinpath("data/fonts")))


def default_registry() -> FontRegistry:
    base = bundled_font_dir()
    reg = FontRegistry()
    for lang, names in _BUNDLED.items():
        for name in names:
            reg.register(lang, base / name)
    return reg
