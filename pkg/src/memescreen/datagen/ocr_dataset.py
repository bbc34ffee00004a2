"""Synthetic OCR dataset: corpus lines stamped onto backgrounds, plus a manifest.

Each sample's RNG comes from (master seed, sample index), so output is the
same for any parallelism level. The manifest is JSON lines with fields
``image, text, language, box, font, size, color, seed``.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..core import Language
from ..errors import EmptyCorpus, NoFontForScript, ProviderFailure
from .backgrounds import BackgroundProvider, ProceduralProvider
from .fonts import SYNTH_LANGUAGES, FontRegistry, covers, default_registry
from .stamp import SIZE_RANGE, stamp_text

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.jsonl"
MANIFEST_FIELDS = ("image", "text", "language", "box", "font", "size", "color", "seed")

Corpus = Union[str, Path, Sequence[str]]


def read_corpus(source: Corpus) -> list[str]:
    """Non-blank lines of a UTF-8 corpus, newline characters removed."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
        lines = [ln[:-1] if ln.endswith("\r") else ln for ln in text.split("\n")]
    else:
        lines = list(source)
    return [ln for ln in lines if ln.strip()]


def sample_seed(master: int, index: int) -> int:
    state = np.random.SeedSequence([int(master) & (2**64 - 1), int(index)]).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


@dataclass(frozen=True)
class Manifest:
    path: Path
    rows: Tuple[dict, ...]

    def __len__(self) -> int:
        return len(self.rows)


def _prepare(corpora: Mapping[Language, Corpus], fonts: FontRegistry) -> dict[Language, list[str]]:
    out = {}
    for lang in sorted(corpora, key=SYNTH_LANGUAGES.index):
        lines = read_corpus(corpora[lang])
        if not lines:
            raise EmptyCorpus(lang)
        specs = fonts.fonts(lang)
        if not specs:
            raise NoFontForScript(f"no font registered for {lang.value}")
        usable = [ln for ln in lines if any(covers(s, ln) for s in specs)]
        if len(usable) < len(lines):
            log.warning("%s: skipping %d lines with glyphs no registered font covers", lang.value, len(lines) - len(usable))
        if not usable:
            raise NoFontForScript(f"no registered {lang.value} font covers any corpus line")
        out[lang] = usable
    return out


def build_ocr_dataset(
    corpora: Mapping[Language, Corpus],
    n_per_language: int,
    out_dir: Union[str, Path],
    seed: int = 0,
    provider: Optional[BackgroundProvider] = None,
    fonts: Optional[FontRegistry] = None,
    size_range: Tuple[int, int] = SIZE_RANGE,
    parallelism: int = 1,
) -> Manifest:
    """Write ``n_per_language`` PNG samples per language and a manifest."""
    if n_per_language < 1:
        raise ValueError("n_per_language must be >= 1")
    unknown = [k for k in corpora if k not in SYNTH_LANGUAGES]
    if unknown:
        raise ValueError(f"unsupported corpus languages: {unknown}")
    fonts = fonts if fonts is not None else default_registry()
    provider = provider if provider is not None else ProceduralProvider()
    lines = _prepare(corpora, fonts)
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)

    jobs = []
    for lang, pool in lines.items():
        for i in range(n_per_language):
            jobs.append((len(jobs), lang, i, pool))

    def make(job) -> dict:
        k, lang, i, pool = job
        s = sample_seed(seed, k)
        line = pool[int(np.random.default_rng(s).integers(len(pool)))]
        try:
            bg = provider.background(k, seed)
        except ProviderFailure:
            raise
        except Exception as exc:
            raise ProviderFailure(f"background provider failed for sample {k}: {exc}") from exc
        sample = stamp_text(bg.image, line, lang, s, fonts=fonts, size_range=size_range, background_id=bg.id)
        rel = f"images/{lang.value.lower()}_{i:05d}.png"
        sample.image.save(out / rel, format="PNG")
        p = sample.placement
        return {
            "image": rel,
            "text": sample.text,
            "language": lang.value,
            "box": list(p.box),
            "font": p.font_id,
            "size": p.size_pt,
            "color": list(p.color_rgb),
            "seed": s,
        }

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as ex:
            rows = list(ex.map(make, jobs))
    else:
        rows = [make(j) for j in jobs]

    path = out / MANIFEST_NAME
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return Manifest(path=path, rows=tuple(rows))


def read_manifest(path: Union[str, Path]) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
