"""HTTP/JSON facade for the interactive what-if loop.

The service holds one global corpus (plus its index) and any number of
models, each as an append-only list of versions. Analyses run against
immutable snapshots and stay retrievable unchanged for the lifetime of
the service, so a dashboard can pin a baseline and diff against it while
the model keeps evolving.

All error payloads share the shape ``{code, message, detail}``.
"""

from __future__ import annotations

import hashlib
import json
import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import analysis as analysis_mod
from .corpus import Band, Corpus, DocKind, load_snapshot
from .errors import EmptyCorpusError, MutationError, ParseError, WorkbenchError
from .model import (
    SystemModel,
    apply_mutations,
    diff_models,
    diff_to_json,
    model_to_json,
    mutation_from_json,
    parse_model,
    serialize_model,
)
from .retrieval import (
    AssociationConfig,
    AttackSurface,
    RetrievalIndex,
    associate,
    build_index,
    surface_to_json,
)

_STATUS_BY_CODE = {
    "PARSE": 400,
    "SNAPSHOT": 400,
    "EMPTY_CORPUS": 400,
    "INVALID_MODEL": 400,
    "CONFIG": 400,
    "NON_FILTER": 400,
    "VALIDATION": 400,
    "NOT_FOUND": 404,
    "CONFLICT": 409,
    "NO_CORPUS": 409,
    "STALE_COMPARISON": 409,
    "INTERNAL": 500,
}


class ApiError(WorkbenchError):
    """Service-level failure with an explicit code (NOT_FOUND, NO_CORPUS, ...)."""

    def __init__(self, code: str, message: str, *, detail: object = None):
        super().__init__(message, detail=detail)
        self.code = code


def _status_for(err: WorkbenchError) -> int:
    if isinstance(err, MutationError):
        return 409  # rejected edits keep the version count unchanged
    return _STATUS_BY_CODE.get(err.code, 400)


class SessionState:
    """In-memory state with optional write-through persistence."""

    def __init__(self, persist_dir: str | Path | None = None):
        self.lock = threading.RLock()
        self.corpus: Corpus | None = None
        self.index: RetrievalIndex | None = None
        self.models: dict[str, list[SystemModel]] = {}
        self.analyses: dict[str, dict] = {}
        self.persist_dir = Path(persist_dir) if persist_dir else None
        self._model_counter = 0

    def load_corpus(self, snapshot_text: str) -> dict:
        warnings: list[str] = []
        corpus = load_snapshot(snapshot_text, warnings=warnings)
        index = build_index(corpus)
        with self.lock:
            self.corpus, self.index = corpus, index
        if self.persist_dir:
            path = self.persist_dir / "corpus.ndjson"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(snapshot_text, encoding="utf-8")
        return {"doc_count": len(corpus), "dangling_ref_count": len(corpus.dangling_refs),
                "build_stamp": corpus.build_stamp, "warnings": warnings}

    def add_model(self, model: SystemModel) -> str:
        with self.lock:
            self._model_counter += 1
            model_id = f"m{self._model_counter}"
            self.models[model_id] = [model]
        self._persist_model(model_id, 1, model)
        return model_id

    def versions(self, model_id: str) -> list[SystemModel]:
        versions = self.models.get(model_id)
        if versions is None:
            raise ApiError("NOT_FOUND", f"no model {model_id!r}")
        return versions

    def append_version(self, model_id: str, model: SystemModel) -> int:
        with self.lock:
            versions = self.versions(model_id)
            versions.append(model)
            number = len(versions)
        self._persist_model(model_id, number, model)
        return number

    def _persist_model(self, model_id: str, version: int, model: SystemModel) -> None:
        if not self.persist_dir:
            return
        path = self.persist_dir / "models" / model_id / f"v{version}.graphml"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(serialize_model(model), encoding="utf-8")

    def store_analysis(self, analysis_id: str, record: dict) -> None:
        with self.lock:
            self.analyses[analysis_id] = record
        if self.persist_dir:
            path = self.persist_dir / "analyses" / f"{analysis_id}.json"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(record["payload"], indent=2), encoding="utf-8")

    def analysis(self, analysis_id: str) -> dict:
        record = self.analyses.get(analysis_id)
        if record is None:
            raise ApiError("NOT_FOUND", f"no analysis {analysis_id!r}")
        return record


def _analysis_id(model_id: str, version: int, config: AssociationConfig,
                 corpus_stamp: str) -> str:
    seed = json.dumps([model_id, version, config.to_json(), corpus_stamp],
                      sort_keys=True)
    return "a-" + hashlib.sha256(seed.encode()).hexdigest()[:12]


def _surface_view(surface: AttackSurface, corpus: Corpus) -> dict:
    """Surface JSON enriched with titles and severity bands for display."""
    view = surface_to_json(surface)
    for row in view["attributes"]:
        for match in row["matches"]:
            doc = corpus.documents.get(match["doc_id"])
            if doc is None:
                continue
            match["kind"] = doc.kind.value
            match["title"] = doc.title
            match["severity_band"] = doc.severity.band.value if doc.severity else None
    return view


def _parse_filter_params(request: Request) -> analysis_mod.FilterSpec | None:
    params = request.query_params
    kinds = None
    if params.get("kinds"):
        kinds = set()
        for name in params["kinds"].split(","):
            try:
                kinds.add(DocKind(name.strip()))
            except ValueError:
                raise ApiError("VALIDATION", f"unknown kind {name.strip()!r}") from None
        kinds = frozenset(kinds)
    band = None
    if params.get("min_severity"):
        try:
            band = Band(params["min_severity"].strip())
        except ValueError:
            raise ApiError("VALIDATION",
                           f"unknown severity band {params['min_severity']!r}") from None
    components = None
    if params.get("components"):
        components = frozenset(c.strip() for c in params["components"].split(",") if c.strip())
    spec = analysis_mod.FilterSpec(include_kinds=kinds, keyword=params.get("keyword"),
                                   min_severity_band=band, component_ids=components)
    return None if spec.is_identity else spec


def create_app(state: SessionState | None = None) -> FastAPI:
    state = state or SessionState()
    app = FastAPI(title="threatscope", docs_url=None, redoc_url=None)
    app.state.session = state
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.exception_handler(WorkbenchError)
    async def workbench_error(_request, exc: WorkbenchError):
        return JSONResponse(status_code=_status_for(exc), content=exc.payload())

    @app.exception_handler(RequestValidationError)
    async def validation_error(_request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={
            "code": "VALIDATION", "message": "invalid request", "detail": exc.errors()})

    @app.exception_handler(StarletteHTTPException)
    async def http_error(_request, exc: StarletteHTTPException):
        return JSONResponse(status_code=exc.status_code, content={
            "code": "HTTP_ERROR", "message": str(exc.detail), "detail": None})

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok"}

    @app.get("/corpus")
    async def corpus_summary():
        if state.corpus is None:
            return {"loaded": False}
        return {"loaded": True, "doc_count": len(state.corpus),
                "dangling_ref_count": len(state.corpus.dangling_refs),
                "build_stamp": state.corpus.build_stamp}

    @app.put("/corpus")
    async def put_corpus(request: Request):
        body = (await request.body()).decode("utf-8")
        if not body.strip():
            raise EmptyCorpusError("snapshot body is empty")
        return state.load_corpus(body)

    @app.post("/models", status_code=201)
    async def post_model(request: Request):
        body = (await request.body()).decode("utf-8")
        warnings: list[str] = []
        model = parse_model(body, warnings=warnings)
        model_id = state.add_model(model)
        return {"model_id": model_id, "version": 1, "warnings": warnings,
                "summary": _model_summary(model)}

    @app.get("/models")
    async def list_models():
        with state.lock:
            return {"models": [
                {"model_id": mid, "version": len(versions),
                 "summary": _model_summary(versions[-1])}
                for mid, versions in state.models.items()]}

    @app.get("/models/{model_id}")
    async def get_model(model_id: str, version: int | None = None):
        versions = state.versions(model_id)
        number = version if version is not None else len(versions)
        if not 1 <= number <= len(versions):
            raise ApiError("NOT_FOUND", f"model {model_id!r} has no version {number}")
        payload = model_to_json(versions[number - 1])
        return {"model_id": model_id, "version": number, "model": payload}

    @app.patch("/models/{model_id}")
    async def patch_model(model_id: str, request: Request):
        try:
            body = json.loads((await request.body()).decode("utf-8") or "null")
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON body: {exc.msg}", line=exc.lineno,
                             column=exc.colno) from exc
        raw_mutations = body.get("mutations") if isinstance(body, dict) else body
        if not isinstance(raw_mutations, list) or not raw_mutations:
            raise ApiError("VALIDATION", "request must carry a non-empty mutation list")
        mutations = [mutation_from_json(obj) for obj in raw_mutations]
        with state.lock:  # mutations to one model are serialized
            before = state.versions(model_id)[-1]
            after = apply_mutations(before, mutations)
            version = state.append_version(model_id, after)
        return {"model_id": model_id, "version": version,
                "diff": diff_to_json(diff_models(before, after))}

    @app.post("/models/{model_id}/analyze")
    async def analyze_model(model_id: str, request: Request):
        raw = (await request.body()).decode("utf-8")
        try:
            config_obj = json.loads(raw) if raw.strip() else None
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON body: {exc.msg}", line=exc.lineno,
                             column=exc.colno) from exc
        config = AssociationConfig.from_json(config_obj)
        with state.lock:
            corpus, index = state.corpus, state.index
            versions = state.versions(model_id)
            version = len(versions)
            model = versions[-1]
        if corpus is None or index is None:
            raise ApiError("NO_CORPUS", "no corpus loaded; PUT /corpus first")
        surface = associate(model, index, corpus, config)
        report = analysis_mod.exposure_report(surface)
        analysis_id = _analysis_id(model_id, version, config, corpus.build_stamp)
        payload = {"analysis_id": analysis_id, "model_id": model_id, "version": version,
                   "corpus_stamp": corpus.build_stamp, "config": config.to_json(),
                   "report": report.to_json()}
        state.store_analysis(analysis_id, {
            "surface": surface, "report": report, "corpus": corpus, "payload": payload})
        return payload

    @app.get("/analyses/{analysis_id}")
    async def get_analysis(analysis_id: str, request: Request):
        record = state.analysis(analysis_id)
        surface: AttackSurface = record["surface"]
        # Analyses stay readable against the snapshot they were computed
        # from, even after a newer corpus replaces the service-global one.
        corpus = record["corpus"]
        warnings: list[str] = []
        spec = _parse_filter_params(request)
        if spec is not None:
            surface = analysis_mod.filter_surface(surface, spec, corpus,
                                                  warnings=warnings)
        view = _surface_view(surface, corpus)
        view.update(record["payload"])
        view["report"] = analysis_mod.exposure_report(surface).to_json()
        view["warnings"] = warnings
        return view

    @app.get("/analyses/{before_id}/diff/{after_id}")
    async def diff_analyses(before_id: str, after_id: str):
        before = state.analysis(before_id)["surface"]
        after = state.analysis(after_id)["surface"]
        diff = analysis_mod.compare_surfaces(before, after)
        return {"before": before_id, "after": after_id,
                "corpus_stamp": before.corpus_stamp, **diff.to_json()}

    return app


def _model_summary(model: SystemModel) -> dict:
    return {"id": model.id,
            "component_count": len(model.components),
            "connection_count": len(model.connections),
            "components": sorted(c.name for c in model.components)}
