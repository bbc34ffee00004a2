"""Print one corpus line onto a background at a random spot, font, size and colour."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from PIL import Image, ImageDraw

from ..core import Language
from ..errors import TextTooLong
from .fonts import FontRegistry, FontSpec, default_registry, load_font

SIZE_RANGE = (12, 48)
MIN_CONTRAST = 60.0
FIT_ATTEMPTS = 50
COLOR_ATTEMPTS = 100

_default_fonts: Optional[FontRegistry] = None


def _fonts() -> FontRegistry:
    global _default_fonts
    if _default_fonts is None:
        _default_fonts = default_registry()
    return _default_fonts


@dataclass(frozen=True)
class Placement:
    x: int  # draw origin
    y: int
    font_id: str
    size_pt: int  # pixels at 72 dpi
    color_rgb: Tuple[int, int, int]
    box: Tuple[int, int, int, int]  # x, y, w, h of the rendered text


@dataclass(frozen=True)
class SynthSample:
    image: Image.Image
    text: str
    language: Language
    placement: Placement
    background_id: str
    seed: int


def luminance(rgb) -> float:
    r, g, b = (float(v) for v in rgb)
    return 0.299 * r + 0.587 * g + 0.114 * b


def region_mean(image: Image.Image, box) -> np.ndarray:
    x, y, w, h = box
    arr = np.asarray(image.convert("RGB"), dtype=np.float64)[y : y + h, x : x + w]
    return arr.reshape(-1, 3).mean(axis=0)


def _measure(line: str, spec: FontSpec, size: int, draw: ImageDraw.ImageDraw):
    return draw.textbbox((0, 0), line, font=load_font(spec, size))


def _fit(line: str, fonts: list, W: int, H: int, rng, size_range, draw):
    lo, hi = size_range
    tried = []
    for _ in range(FIT_ATTEMPTS):
        spec = fonts[int(rng.integers(len(fonts)))]
        size = int(rng.integers(lo, hi + 1))
        bbox = _measure(line, spec, size, draw)
        if bbox[2] - bbox[0] <= W and bbox[3] - bbox[1] <= H:
            return spec, size, bbox
        tried.append((size, spec))
    size, spec = min(tried, key=lambda t: t[0])
    for s in range(size - 1, lo - 1, -1):
        bbox = _measure(line, spec, s, draw)
        if bbox[2] - bbox[0] <= W and bbox[3] - bbox[1] <= H:
            return spec, s, bbox
    raise TextTooLong(f"{len(line)}-char line does not fit a {W}x{H} image at {lo}px")


def _pick_color(rng, target_lum: float) -> Tuple[int, int, int]:
    for _ in range(COLOR_ATTEMPTS):
        c = tuple(int(v) for v in rng.integers(0, 256, 3))
        if abs(luminance(c) - target_lum) >= MIN_CONTRAST:
            return c
    return (0, 0, 0) if target_lum >= 127.5 else (255, 255, 255)


def stamp_text(
    background: Image.Image,
    line: str,
    language: Language,
    seed: int,
    fonts: Optional[FontRegistry] = None,
    size_range: Tuple[int, int] = SIZE_RANGE,
    background_id: str = "",
) -> SynthSample:
    """Render ``line`` fully inside ``background``.

    Font and size are rejection-sampled until the text fits; after
    ``FIT_ATTEMPTS`` misses the smallest sampled size is shrunk step by step
    down to the range minimum. Colour is resampled until its luminance
    differs from the covered region's mean by at least ``MIN_CONTRAST``.
    """
    if not line or not line.strip():
        raise ValueError("line must contain visible text")
    lo, hi = size_range
    if not 1 <= lo <= hi:
        raise ValueError(f"bad size range {size_range}")
    registry = fonts if fonts is not None else _fonts()
    usable = registry.fonts_for(language, line)
    base = background.convert("RGB")
    W, H = base.size
    rng = np.random.default_rng(int(seed) & (2**64 - 1))
    canvas = base.copy()
    draw = ImageDraw.Draw(canvas)

    spec, size, (l, t, r, b) = _fit(line, usable, W, H, rng, size_range, draw)
    w, h = r - l, b - t
    bx = int(rng.integers(0, W - w + 1))
    by = int(rng.integers(0, H - h + 1))
    box = (bx, by, w, h)
    target = luminance(region_mean(base, box)) if w and h else luminance(base.getpixel((bx, by)))
    color = _pick_color(rng, target)
    origin = (bx - l, by - t)
    draw.text(origin, line, font=load_font(spec, size), fill=color)
    return SynthSample(
        image=canvas,
        text=line,
        language=language,
        placement=Placement(origin[0], origin[1], spec.font_id, size, color, box),
        background_id=background_id,
        seed=int(seed),
    )


def ink_box(before: Image.Image, after: Image.Image) -> Optional[Tuple[int, int, int, int]]:
    """Bounding box (x, y, w, h) of pixels that changed, or None."""
    a = np.asarray(before.convert("RGB"), dtype=np.int16)
    b = np.asarray(after.convert("RGB"), dtype=np.int16)
    changed = np.any(a != b, axis=2)
    if not changed.any():
        return None
    ys, xs = np.nonzero(changed)
    return (int(xs.min()), int(ys.min()), int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1))
