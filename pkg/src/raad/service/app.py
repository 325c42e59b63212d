"""HTTP surface wrapping one batch engine and its annotation store."""

from __future__ import annotations

from collections import OrderedDict

from fastapi import Depends, FastAPI, HTTPException, Request, Response
from fastapi.responses import JSONResponse

from ..core import DomainError, InvalidHyperparameter, adjust_scored
from ..pipeline import BatchEngine, BatchResult, UnknownEvent
from ..store import FpStore, StorageFailure
from .config import ServiceConfig
from .ndjson import parse_events
from .schemas import (
    AnnotationRequest,
    AnnotationResponse,
    ConfigModel,
    OutcomeModel,
    PreviewRequest,
)
from .wire import batch_result_to_dict, dumps

__all__ = ["create_app"]


class _BatchContext:
    """Per-batch wire metadata needed to rebuild responses byte-identically."""

    __slots__ = ("line_numbers", "parse_rejects")

    def __init__(self, line_numbers: tuple[int, ...], parse_rejects: tuple[dict, ...]) -> None:
        self.line_numbers = line_numbers
        self.parse_rejects = parse_rejects


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    cfg = config or ServiceConfig()
    store = FpStore.open(cfg.store_path) if cfg.store_path else FpStore()
    engine = BatchEngine(store, cfg.adjustment, retention=cfg.retention)
    token = cfg.resolved_token()

    app = FastAPI(title="raad", version="0.1.0")
    app.state.engine = engine
    app.state.store = store
    app.state.service_config = cfg
    contexts: OrderedDict[int, _BatchContext] = OrderedDict()

    def require_auth(request: Request) -> None:
        if token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or invalid bearer token")

    def batch_payload(result: BatchResult) -> dict:
        ctx = contexts.get(result.batch_id)
        if ctx is None:
            return batch_result_to_dict(result)
        return batch_result_to_dict(result, ctx.line_numbers, ctx.parse_rejects)

    def json_bytes(payload: dict, status_code: int = 200) -> Response:
        return Response(content=dumps(payload), media_type="application/json", status_code=status_code)

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/v1/batches", dependencies=[Depends(require_auth)])
    async def post_batch(request: Request) -> Response:
        body = await request.body()
        try:
            parsed = parse_events(body)
        except UnicodeDecodeError:
            raise HTTPException(status_code=400, detail="body must be UTF-8 NDJSON")
        try:
            result = engine.process_batch(parsed.events)
        except StorageFailure as exc:
            raise HTTPException(status_code=503, detail=str(exc))
        ctx = _BatchContext(tuple(parsed.line_numbers), tuple(parsed.rejects))
        contexts[result.batch_id] = ctx
        while len(contexts) > engine.retention:
            contexts.popitem(last=False)
        return json_bytes(batch_payload(result))

    @app.get("/v1/batches/{batch_id}", dependencies=[Depends(require_auth)])
    def get_batch(batch_id: int) -> Response:
        result = engine.get_batch(batch_id)
        if result is None:
            raise HTTPException(status_code=404, detail=f"batch {batch_id} is not retained")
        return json_bytes(batch_payload(result))

    @app.get("/v1/alerts", dependencies=[Depends(require_auth)])
    def get_alerts(batch_id: int | None = None) -> Response:
        result = engine.get_batch(batch_id) if batch_id is not None else engine.latest_batch()
        if result is None:
            detail = f"batch {batch_id} is not retained" if batch_id is not None else "no batches processed yet"
            raise HTTPException(status_code=404, detail=detail)
        return json_bytes(batch_payload(result))

    @app.post("/v1/annotations", status_code=201, dependencies=[Depends(require_auth)])
    def post_annotation(body: AnnotationRequest) -> AnnotationResponse:
        try:
            annotation_id = engine.annotate_from_outcome(
                body.batch_id, body.event_id, annotator=body.annotator, note=body.note
            )
        except UnknownEvent as exc:
            raise HTTPException(status_code=404, detail=str(exc.args[0] if exc.args else exc))
        except StorageFailure as exc:
            raise HTTPException(status_code=503, detail=str(exc))
        return AnnotationResponse(annotation_id=annotation_id)

    @app.get("/v1/config", dependencies=[Depends(require_auth)])
    def get_config() -> ConfigModel:
        return ConfigModel.from_core(engine.config)

    @app.put("/v1/config", dependencies=[Depends(require_auth)])
    def put_config(body: ConfigModel) -> ConfigModel:
        try:
            new_cfg = body.to_core()
        except InvalidHyperparameter as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        engine.set_config(new_cfg)
        return ConfigModel.from_core(new_cfg)

    @app.post("/v1/preview", dependencies=[Depends(require_auth)])
    def post_preview(body: PreviewRequest) -> OutcomeModel:
        base = engine.config
        try:
            effective = body.config.apply(base) if body.config is not None else base
            outcome = adjust_scored(body.score, body.theta, body.d, effective)
        except (InvalidHyperparameter, DomainError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return OutcomeModel(
            theta_closest=outcome.theta_closest,
            d_closest=outcome.d_closest,
            theta_adjusted=outcome.theta_adjusted,
            d_adjusted=outcome.d_adjusted,
            fp_confidence=outcome.fp_confidence,
            score_original=outcome.score_original,
            score_adjusted=outcome.score_adjusted,
            annotation_id=outcome.annotation_id,
        )

    return app
