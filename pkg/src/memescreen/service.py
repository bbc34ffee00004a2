"""HTTP scoring service (``/api/v1``).

    POST /api/v1/score   multipart field ``image`` (optional ``id``), JSON
                         ``{"image_b64", "id"?}``, or raw image bytes
    GET  /api/v1/health  ``{"status", "backends": {role: {name, reachable}}}``

Status codes: 400 undecodable image, 502 stage failure (body names the
stage), 503 while draining for shutdown.
"""

from __future__ import annotations

import asyncio
import base64
import binascii
import dataclasses
import logging
import threading
import time
from contextlib import asynccontextmanager
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from starlette.concurrency import run_in_threadpool

from .backends.base import BackendSet
from .config import AppConfig
from .core import validate_meme_input
from .errors import EmptyId, StageFailure, UndecodableImage
from .pipeline import PipelineConfig, score_one

log = logging.getLogger(__name__)

API = "/api/v1"


class ServiceState:
    def __init__(self, backends: BackendSet, pipeline_cfg: PipelineConfig, parallelism: int, drain_timeout: float):
        self.backends = backends
        self.pipeline_cfg = pipeline_cfg
        self.parallelism = parallelism
        self.drain_timeout = drain_timeout
        self.draining = False
        self._in_flight = 0
        self._lock = threading.Lock()
        self._idle = threading.Condition(self._lock)
        self._sem: Optional[asyncio.Semaphore] = None

    def semaphore(self) -> asyncio.Semaphore:
        if self._sem is None:
            self._sem = asyncio.Semaphore(self.parallelism)
        return self._sem

    def enter(self) -> None:
        with self._lock:
            self._in_flight += 1

    def leave(self) -> None:
        with self._lock:
            self._in_flight -= 1
            if self._in_flight == 0:
                self._idle.notify_all()

    @property
    def in_flight(self) -> int:
        return self._in_flight

    def begin_drain(self) -> None:
        self.draining = True

    def wait_idle(self, timeout: Optional[float] = None) -> bool:
        deadline = time.monotonic() + (self.drain_timeout if timeout is None else timeout)
        with self._idle:
            while self._in_flight:
                left = deadline - time.monotonic()
                if left <= 0:
                    return False
                self._idle.wait(left)
        return True


def _error(status: int, body: dict) -> JSONResponse:
    return JSONResponse(status_code=status, content=body)


async def _read_payload(request: Request) -> tuple[bytes, Optional[str]]:
    ctype = request.headers.get("content-type", "")
    if ctype.startswith("multipart/form-data"):
        form = await request.form()
        upload = form.get("image")
        if upload is None or isinstance(upload, str):
            raise UndecodableImage("multipart request has no 'image' file field")
        meme_id = form.get("id")
        return await upload.read(), (str(meme_id) if meme_id else None)
    raw = await request.body()
    if ctype.startswith("application/json"):
        try:
            payload = await request.json()
            data = base64.b64decode(payload["image_b64"], validate=True)
        except (ValueError, KeyError, TypeError, binascii.Error) as exc:
            raise UndecodableImage(f"JSON body needs a base64 'image_b64' field: {exc}") from exc
        meme_id = payload.get("id")
        return data, (str(meme_id) if meme_id else None)
    return raw, request.query_params.get("id")


def create_app(
    cfg: Optional[AppConfig] = None,
    backends: Optional[BackendSet] = None,
    pipeline_cfg: Optional[PipelineConfig] = None,
) -> FastAPI:
    cfg = cfg if cfg is not None else AppConfig()
    backends = backends if backends is not None else cfg.build_backends()
    state = ServiceState(
        backends,
        pipeline_cfg if pipeline_cfg is not None else cfg.pipeline_config(),
        cfg.parallelism,
        cfg.service.drain_timeout,
    )

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        state.begin_drain()
        drained = await run_in_threadpool(state.wait_idle)
        if not drained:
            log.warning("shutdown with %d requests still in flight", state.in_flight)
        backends.close()

    app = FastAPI(title="memescreen", version="1", lifespan=lifespan)
    app.state.service = state

    @app.middleware("http")
    async def refuse_while_draining(request: Request, call_next):
        if state.draining:
            return _error(503, {"error": "DRAINING", "message": "service is shutting down"})
        return await call_next(request)

    @app.get(f"{API}/health")
    async def health():
        backends_health = await run_in_threadpool(state.backends.health)
        ok = all(b["reachable"] for b in backends_health.values())
        return {"status": "ok" if ok else "degraded", "backends": backends_health}

    @app.post(f"{API}/score")
    async def score(request: Request):
        state.enter()
        try:
            try:
                raw, meme_id = await _read_payload(request)
                meme = validate_meme_input(raw, meme_id or "pending")
            except (UndecodableImage, EmptyId) as exc:
                return _error(400, exc.to_dict())
            if not meme_id:
                meme = dataclasses.replace(meme, id=meme.content_hash[:16])
            async with state.semaphore():
                try:
                    result = await run_in_threadpool(score_one, meme, state.backends, state.pipeline_cfg)
                except StageFailure as exc:
                    return _error(502, exc.to_dict())
            return result.to_dict()
        finally:
            state.leave()

    return app


def serve(cfg: AppConfig) -> None:
    import uvicorn

    uvicorn.run(
        create_app(cfg),
        host=cfg.service.host,
        port=cfg.service.port,
        limit_concurrency=None,
        timeout_graceful_shutdown=int(cfg.service.drain_timeout),
    )
