"""HTTP surface: POST /embed, GET /health, GET /info.

The request body is parsed by hand so malformed input yields 400 (not a
framework-specific 422); oversize batches yield 413; both embedding and
health report 503 until the model finishes loading.
"""

from __future__ import annotations

import json
import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .backend import EmbeddingBackend, ServiceConfig


def create_app(config: ServiceConfig, autoload: bool = True) -> FastAPI:
    app = FastAPI(title="embed-service", docs_url=None, redoc_url=None)
    backend = EmbeddingBackend(config)
    app.state.backend = backend

    if autoload:
        @app.on_event("startup")
        def start_loading():
            threading.Thread(target=_load_quietly, args=(backend,), daemon=True).start()

    @app.get("/health")
    def health():
        if not backend.ready:
            detail = {"status": "loading"}
            if backend.load_error:
                detail = {"status": "error", "error": backend.load_error}
            return JSONResponse(detail, status_code=503)
        return {"status": "ok", "dim": backend.dim}

    @app.get("/info")
    def info():
        if not backend.ready:
            return JSONResponse({"status": "loading"}, status_code=503)
        return {
            "model": config.model_name,
            "dim": backend.dim,
            "max_batch": config.max_batch,
            "truncation": config.truncation,
        }

    @app.post("/embed")
    async def embed(request: Request):
        payload = await request.body()
        if not backend.ready:
            return JSONResponse({"error": "model not loaded"}, status_code=503)
        try:
            body = json.loads(payload)
            texts = body["texts"]
            if not isinstance(texts, list) or any(not isinstance(t, str) for t in texts):
                raise ValueError("texts must be a list of strings")
        except (ValueError, KeyError, TypeError, json.JSONDecodeError):
            return JSONResponse({"error": "malformed request body"}, status_code=400)
        if len(texts) > config.max_batch:
            return JSONResponse(
                {"error": f"at most {config.max_batch} texts per request"}, status_code=413
            )
        vectors = backend.embed(texts)
        return {"embeddings": vectors, "dim": backend.dim, "model": config.model_name}

    return app


def _load_quietly(backend: EmbeddingBackend) -> None:
    try:
        backend.load()
    except Exception:
        pass  # recorded in backend.load_error, reported via /health


def serve(config: ServiceConfig, autoload: bool = True) -> None:
    """Run the service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(config, autoload=autoload), host=config.host, port=config.port)
