"""Embedded HTTP/JSON API over one in-memory modeling session.

The service owns a corpus store, at most one model, and the parameters
the model was built with. Corpus mutations bump the store generation;
a model built from an older generation is still served but every
response derived from it carries ``stale: true``.

Builds over large corpora run on a background thread: POST /model
answers 202 immediately and GET /model reports progress. Mutations and
model reads serialize behind one lock; the build job itself works on a
snapshot of the document list and publishes its result atomically.

Prediction and perplexity responses are rendered through the same
serialization helpers the CLI uses, byte for byte.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles

from . import evaluate, model as model_mod, predict as predict_mod, wire
from .corpus import CorpusStore
from .errors import (
    CorpusEmptyError,
    GramforgeError,
    InvalidArgumentError,
    ModelNotBuiltError,
)
from .model import MAX_ORDER, ModelStats, NGramModel
from .predict import GenerationRequest
from .smoothing import SmoothingMethod
from .tokenizer import MIN_PROBE_BYTES, tokenize

DEFAULT_ASYNC_BUILD_TOKENS = 5_000_000
DEFAULT_UPLOAD_CAP = 2 * 1024 * 1024 * 1024
STATIC_ENV = "GRAMFORGE_STATIC"

STATUS_NONE = "none"
STATUS_BUILDING = "building"
STATUS_READY = "ready"
STATUS_FAILED = "failed"

_HTTP_STATUS = {
    "upload_too_large": 413,
    "invalid_argument": 400,
    "invalid_order": 400,
    "insufficient_context": 400,
    "empty_document": 400,
    "measurement_unreliable": 400,
    "no_scoreable_tokens": 400,
    "model_format": 400,
    "document_not_found": 404,
    "corpus_empty": 409,
    "model_not_built": 409,
    "model_empty": 409,
    "build_in_progress": 409,
}


class BuildInProgressError(GramforgeError):
    code = "build_in_progress"


@dataclass
class Session:
    store: CorpusStore = field(default_factory=CorpusStore)
    model: NGramModel | None = None
    model_params: dict | None = None
    build_stats: ModelStats | None = None
    built_generation: int = -1
    build_status: str = STATUS_NONE
    build_error: str | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    def stale(self) -> bool:
        return self.model is not None and (
            self.built_generation != self.store.generation
        )

    def require_model(self) -> NGramModel:
        if self.model is None:
            raise ModelNotBuiltError("no model has been built in this session")
        return self.model


def _error_response(code: str, message: str) -> Response:
    status = _HTTP_STATUS.get(code, 500)
    return Response(
        content=wire.dumps({"error": code, "message": message}),
        status_code=status,
        media_type="application/json",
    )


def _json_response(payload, status_code: int = 200) -> Response:
    return Response(
        content=wire.dumps(payload),
        status_code=status_code,
        media_type="application/json",
    )


def _parse_bool(raw: str | None, default: bool, name: str) -> bool:
    if raw is None or raw == "":
        return default
    lowered = raw.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise InvalidArgumentError(f"{name} must be a boolean, got {raw!r}")


def _parse_int(raw: str | None, default: int, name: str) -> int:
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise InvalidArgumentError(f"{name} must be an integer, got {raw!r}")


def _parse_multipart(body: bytes, content_type: str) -> tuple[str | None, str]:
    """Minimal multipart/form-data reader: first file-ish part wins.

    Returns (filename, text). Only what the upload form needs; anything
    structurally off raises InvalidArgumentError.
    """
    marker = "boundary="
    index = content_type.find(marker)
    if index < 0:
        raise InvalidArgumentError("multipart body without a boundary parameter")
    boundary = content_type[index + len(marker) :].strip().strip('"')
    if not boundary:
        raise InvalidArgumentError("empty multipart boundary")
    delimiter = b"--" + boundary.encode("utf-8")
    chosen: tuple[str | None, bytes] | None = None
    for chunk in body.split(delimiter):
        chunk = chunk.strip(b"\r\n")
        if not chunk or chunk == b"--":
            continue
        header_blob, _, content = chunk.partition(b"\r\n\r\n")
        headers = header_blob.decode("utf-8", errors="replace")
        filename = None
        for piece in headers.replace("\r\n", ";").split(";"):
            piece = piece.strip()
            if piece.startswith("filename="):
                filename = piece[len("filename=") :].strip('"')
        if chosen is None or filename is not None:
            chosen = (filename, content)
            if filename is not None:
                break
    if chosen is None:
        raise InvalidArgumentError("multipart body held no parts")
    filename, content = chosen
    return filename, content.decode("utf-8", errors="replace")


def _resolve_method(
    session: Session, smoothing: str | None, k: str | None
) -> SmoothingMethod:
    k_value = None
    if k is not None and k != "":
        try:
            k_value = float(k)
        except ValueError:
            raise InvalidArgumentError(f"k must be a number, got {k!r}")
    if smoothing:
        return SmoothingMethod.parse(smoothing, k_value)
    if session.model_params is not None:
        return session.model_params["method"]
    return SmoothingMethod.laplace()


def _find_static_dir(explicit) -> Path | None:
    candidates = []
    if explicit:
        candidates.append(Path(explicit))
    env = os.environ.get(STATIC_ENV)
    if env:
        candidates.append(Path(env))
    candidates.append(Path(__file__).resolve().parents[2] / "frontend" / "dist")
    candidates.append(Path.cwd() / "frontend" / "dist")
    for candidate in candidates:
        if candidate.is_dir() and (candidate / "index.html").is_file():
            return candidate
    return None


def create_app(
    session: Session | None = None,
    async_build_tokens: int = DEFAULT_ASYNC_BUILD_TOKENS,
    upload_cap: int = DEFAULT_UPLOAD_CAP,
    static_dir=None,
) -> FastAPI:
    app = FastAPI(title="gramforge", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    state = session if session is not None else Session()
    app.state.session = state

    @app.exception_handler(GramforgeError)
    async def _engine_error(_request, exc: GramforgeError):
        return _error_response(exc.code, str(exc))

    def _model_payload() -> dict:
        stats = (
            None
            if state.build_stats is None
            else wire.model_stats_payload(state.build_stats)
        )
        params = None
        if state.model_params is not None:
            params = {
                "n": state.model_params["n"],
                "smoothing": wire.smoothing_payload(state.model_params["method"]),
            }
        return {
            "status": state.build_status,
            "stale": state.stale(),
            "model": stats,
            "params": params,
            "error": state.build_error,
        }

    @app.post("/corpus")
    async def corpus_add(request: Request):
        declared = request.headers.get("content-length")
        if declared and declared.isdigit() and int(declared) > upload_cap:
            return _error_response(
                "upload_too_large",
                f"upload of {declared} bytes exceeds the {upload_cap} byte cap",
            )
        body = await request.body()
        if len(body) > upload_cap:
            return _error_response(
                "upload_too_large",
                f"upload of {len(body)} bytes exceeds the {upload_cap} byte cap",
            )
        content_type = request.headers.get("content-type", "text/plain")
        filename = None
        if content_type.startswith("multipart/form-data"):
            filename, text = _parse_multipart(body, content_type)
        else:
            text = body.decode("utf-8", errors="replace")
        name = request.query_params.get("name") or filename or "document"
        with state.lock:
            doc = state.store.add_document(name, text)
            payload = wire.document_payload(doc)
        return _json_response(payload, status_code=201)

    @app.get("/corpus")
    def corpus_list():
        with state.lock:
            payload = wire.corpus_listing_payload(
                state.store.documents, state.store.stats()
            )
        return _json_response(payload)

    @app.delete("/corpus/{doc_id}")
    def corpus_remove(doc_id: str):
        with state.lock:
            doc = state.store.remove_document(doc_id)
            payload = {
                "removed": wire.document_payload(doc),
                "stats": wire.corpus_stats_payload(state.store.stats()),
            }
        return _json_response(payload)

    @app.delete("/corpus")
    def corpus_clear():
        with state.lock:
            removed = len(state.store.documents)
            state.store.clear()
        return _json_response({"cleared": True, "removed_documents": removed})

    def _publish_build(
        result: model_mod.BuildResult, generation: int, params: dict
    ) -> None:
        with state.lock:
            state.model = result.model
            state.model_params = params
            state.build_stats = result.stats
            state.built_generation = generation
            state.build_status = STATUS_READY
            state.build_error = None

    def _build_job(docs: list[list[str]], n: int, generation: int, params: dict):
        try:
            result = model_mod.build(docs, n)
        except Exception as exc:
            with state.lock:
                state.build_status = STATUS_FAILED
                state.build_error = str(exc)
            return
        _publish_build(result, generation, params)

    @app.post("/model")
    async def model_build(request: Request):
        try:
            spec = json.loads(await request.body() or b"{}")
        except json.JSONDecodeError as exc:
            raise InvalidArgumentError(f"request body is not valid JSON: {exc}")
        if not isinstance(spec, dict):
            raise InvalidArgumentError("request body must be a JSON object")
        n = spec.get("n")
        if not isinstance(n, int) or isinstance(n, bool) or not 1 <= n <= MAX_ORDER:
            raise InvalidArgumentError(f"n must be an integer in 1..{MAX_ORDER}, got {n!r}")
        method = SmoothingMethod.parse(
            spec.get("smoothing", "laplace"), spec.get("k")
        )
        params = {"n": n, "method": method}
        with state.lock:
            if state.build_status == STATUS_BUILDING:
                raise BuildInProgressError("a model build is already running")
            docs = [doc.tokens for doc in state.store.documents]
            generation = state.store.generation
            if not docs:
                raise CorpusEmptyError("the corpus holds no documents")
            total_tokens = sum(len(tokens) for tokens in docs)
            if total_tokens > async_build_tokens:
                state.build_status = STATUS_BUILDING
                state.build_error = None
        if total_tokens > async_build_tokens:
            worker = threading.Thread(
                target=_build_job,
                args=(docs, n, generation, params),
                daemon=True,
            )
            worker.start()
            return _json_response(
                {
                    "status": STATUS_BUILDING,
                    "params": {
                        "n": n,
                        "smoothing": wire.smoothing_payload(method),
                    },
                    "total_tokens": total_tokens,
                },
                status_code=202,
            )
        result = model_mod.build(docs, n)
        _publish_build(result, generation, params)
        with state.lock:
            return _json_response(_model_payload())

    @app.get("/model")
    def model_status():
        with state.lock:
            return _json_response(_model_payload())

    @app.post("/model/prune")
    async def model_prune(request: Request):
        try:
            spec = json.loads(await request.body() or b"{}")
        except json.JSONDecodeError as exc:
            raise InvalidArgumentError(f"request body is not valid JSON: {exc}")
        threshold = spec.get("threshold") if isinstance(spec, dict) else None
        if not isinstance(threshold, int) or isinstance(threshold, bool):
            raise InvalidArgumentError("threshold must be an integer")
        with state.lock:
            if state.build_status == STATUS_BUILDING:
                raise BuildInProgressError("a model build is already running")
            model = state.require_model()
            removed = model.prune(threshold)
            state.build_stats = model.stats(
                None if state.build_stats is None else state.build_stats.build_millis
            )
            payload = {
                "removed_contexts": removed,
                "model": wire.model_stats_payload(state.build_stats),
                "stale": state.stale(),
            }
        return _json_response(payload)

    @app.get("/predict")
    def predict(request: Request):
        params = request.query_params
        prompt = params.get("prompt", "")
        count = _parse_int(params.get("count"), 1, "count")
        top = _parse_int(params.get("top"), predict_mod.DEFAULT_TOP, "top")
        backoff = _parse_bool(params.get("backoff"), True, "backoff")
        method = _resolve_method(state, params.get("smoothing"), params.get("k"))
        with state.lock:
            model = state.require_model()
            stale = state.stale()
            generation_request = GenerationRequest(
                prompt=prompt,
                token_count=count,
                method=method,
                backoff_enabled=backoff,
            )
            result = predict_mod.generate(model, generation_request)
            predictions = predict_mod.next_word(
                model,
                tokenize(prompt, state.store.config),
                method,
                top=top,
                backoff_enabled=backoff,
            )
            payload = wire.predict_payload(
                prompt, method, result, predictions, stale=stale
            )
        return _json_response(payload)

    @app.get("/perplexity")
    def perplexity(request: Request):
        params = request.query_params
        text = params.get("text")
        if text is None or text == "":
            raise InvalidArgumentError("text query parameter is required")
        method = _resolve_method(state, params.get("smoothing"), params.get("k"))
        with state.lock:
            model = state.require_model()
            stale = state.stale()
            tokens = tokenize(text, state.store.config)
            report = evaluate.perplexity(model, tokens, method)
            payload = wire.perplexity_payload(report, stale=stale)
        return _json_response(payload)

    @app.get("/bench/throughput")
    def bench_throughput():
        with state.lock:
            if not state.store.documents:
                raise CorpusEmptyError("the corpus holds no documents")
            pieces: list[str] = []
            size = 0
            for doc in state.store.documents:
                text = " ".join(doc.tokens)
                pieces.append(text)
                size += len(text) + 1
                if size >= 8 * MIN_PROBE_BYTES:
                    break
            sample = " ".join(pieces)
        if not sample:
            raise CorpusEmptyError("the corpus holds no usable text")
        while len(sample) < MIN_PROBE_BYTES:
            sample = sample + " " + sample
        rate = evaluate.throughput_from_text(sample, state.store.config)
        return _json_response({"tokens_per_second": rate})

    static_root = _find_static_dir(static_dir)
    if static_root is not None:
        app.mount("/", StaticFiles(directory=static_root, html=True), name="ui")

    return app


def serve(port: int = 8000, host: str = "127.0.0.1") -> None:
    """Run the service until interrupted."""
    import uvicorn

    try:
        uvicorn.run(create_app(), host=host, port=port, log_level="warning")
    except (OSError, SystemExit) as exc:
        raise GramforgeError(f"server failed to start on {host}:{port}: {exc}")
