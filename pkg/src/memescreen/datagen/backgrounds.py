"""Background images for synthetic OCR samples.

The procedural provider draws solid fills, two-colour gradients and value
noise. ``HttpBackgroundProvider`` is the hook for externally generated
imagery such as diffusion-model output.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

import httpx
import numpy as np
from PIL import Image

from ..errors import ProviderFailure

DEFAULT_SIZE = (512, 512)
KINDS = ("solid", "gradient", "noise")


@dataclass(frozen=True)
class Background:
    image: Image.Image
    id: str


class BackgroundProvider(Protocol):
    def background(self, index: int, seed: int) -> Background: ...


def _rng(seed: int, index: int, salt: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), index, salt]))


class ProceduralProvider:
    def __init__(self, size: Sequence[int] = DEFAULT_SIZE, kinds: Sequence[str] = KINDS):
        w, h = (int(v) for v in size)
        if w < 1 or h < 1:
            raise ValueError("background size must be positive")
        unknown = set(kinds) - set(KINDS)
        if unknown or not kinds:
            raise ValueError(f"unknown background kinds: {sorted(unknown)}")
        self.size = (w, h)
        self.kinds = tuple(kinds)

    def background(self, index: int, seed: int) -> Background:
        rng = _rng(seed, index)
        kind = self.kinds[int(rng.integers(len(self.kinds)))]
        w, h = self.size
        if kind == "solid":
            arr = np.broadcast_to(rng.integers(0, 256, 3, dtype=np.uint8), (h, w, 3)).copy()
        elif kind == "gradient":
            a, b = rng.integers(0, 256, (2, 3)).astype(np.float64)
            angle = rng.uniform(0, 2 * np.pi)
            yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
            proj = xx * np.cos(angle) + yy * np.sin(angle)
            span = proj.max() - proj.min()
            t = (proj - proj.min()) / span if span > 0 else np.zeros_like(proj)
            arr = np.rint(a + (b - a) * t[..., None]).astype(np.uint8)
        else:
            cells = int(rng.integers(3, 17))
            grid = rng.random((cells, cells))
            coarse = Image.fromarray((grid * 255).astype(np.uint8), mode="L")
            t = np.asarray(coarse.resize((w, h), Image.BILINEAR), dtype=np.float64) / 255.0
            a, b = rng.integers(0, 256, (2, 3)).astype(np.float64)
            arr = np.rint(a + (b - a) * t[..., None]).astype(np.uint8)
        return Background(Image.fromarray(arr, mode="RGB"), f"procedural-{kind}-{index}")


class HttpBackgroundProvider:
    """POSTs ``{"index", "seed", "width", "height"}``; expects image bytes back."""

    def __init__(
        self,
        endpoint: str,
        size: Sequence[int] = DEFAULT_SIZE,
        timeout: float = 60.0,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.endpoint = endpoint
        self.size = tuple(int(v) for v in size)
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def background(self, index: int, seed: int) -> Background:
        w, h = self.size
        try:
            resp = self._client.post(self.endpoint, json={"index": index, "seed": seed, "width": w, "height": h})
            resp.raise_for_status()
            with Image.open(io.BytesIO(resp.content)) as img:
                image = img.convert("RGB")
        except httpx.TimeoutException as exc:
            raise ProviderFailure(f"background provider timed out for index {index}") from exc
        except Exception as exc:
            raise ProviderFailure(f"background provider failed for index {index}: {exc}") from exc
        if image.size != (w, h):
            image = image.resize((w, h), Image.BICUBIC)
        return Background(image, f"external-{index}")

    def close(self) -> None:
        self._client.close()


def generate_backgrounds(n: int, provider: Optional[BackgroundProvider] = None, seed: int = 0) -> list[Background]:
    """``n`` backgrounds, deterministic in (provider, seed)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    provider = provider if provider is not None else ProceduralProvider()
    out = []
    for i in range(n):
        try:
            out.append(provider.background(i, seed))
        except ProviderFailure:
            raise
        except Exception as exc:
            raise ProviderFailure(f"background provider failed for index {i}: {exc}") from exc
    return out
