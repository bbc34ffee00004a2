"""
The HTTP scoring service
========================

The FastAPI app exercised in-process; ``memescreen serve`` runs the same
app under uvicorn.
"""

import asyncio
import base64
import io

import httpx
from PIL import Image

from memescreen.backends import MockCaptioner, mock_backends
from memescreen.config import AppConfig
from memescreen.errors import BackendUnavailable
from memescreen.service import create_app


def png(color):
    buf = io.BytesIO()
    Image.new("RGB", (32, 32), color).save(buf, format="PNG")
    return buf.getvalue()


async def main():
    app = create_app(AppConfig(), mock_backends(logits={"Yes": 1.2, "No": 0.3}))
    async with httpx.AsyncClient(transport=httpx.ASGITransport(app=app), base_url="http://svc") as c:
        print((await c.get("/api/v1/health")).json()["status"])

        r = await c.post("/api/v1/score", files={"image": ("a.png", png((9, 9, 9)), "image/png")}, data={"id": "a"})
        print(r.status_code, {k: r.json()[k] for k in ("id", "probability", "label")})

        r = await c.post("/api/v1/score", json={"image_b64": base64.b64encode(png((1, 2, 3))).decode()})
        print(r.status_code, r.json()["id"])

        r = await c.post("/api/v1/score", content=b"")
        print(r.status_code, r.json()["code"])

        many = await asyncio.gather(*[c.post(f"/api/v1/score?id=x{k}", content=png((k, k, k))) for k in range(25)])
        print(sorted({r.status_code for r in many}))

    broken = mock_backends()
    broken.captioner = MockCaptioner(errors={"*": BackendUnavailable("captioner down")}, reachable=False)
    app = create_app(AppConfig(), broken)
    async with httpx.AsyncClient(transport=httpx.ASGITransport(app=app), base_url="http://svc") as c:
        print((await c.get("/api/v1/health")).json()["status"])
        r = await c.post("/api/v1/score", content=png((0, 0, 0)))
        print(r.status_code, r.json())


asyncio.run(main())
