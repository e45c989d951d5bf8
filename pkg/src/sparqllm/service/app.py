"""HTTP service wiring the full pipeline: retrieve -> generate -> execute ->
summarize -> decide -> plan.  Snapshots (corpus + index) swap atomically."""

from __future__ import annotations

import json
import logging
import threading
from pathlib import Path
from typing import Optional

import httpx
from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from ..embeddings import HttpEmbeddingGateway, MockEmbeddingGateway
from ..errors import SparqllmError, StateError, TransportError
from ..generation import (
    GenerationConfig,
    GenerationExhausted,
    HttpLlmGateway,
    LlmGateway,
    QueryGenerator,
    ScriptedLlmGateway,
)
from ..kg import QueryError, SparqlHttpClient, apply_mapping, check_placeholders, clean_rows, load_mapping, read_csv
from ..kg.cleaning import load_cleaning_rules
from ..kg.ontology import OntologySchema, load_ontology
from ..sparql import EMBEDDED_ENDPOINT_URL, EmbeddedSparqlTransport, MemoryTripleStore, handle_sparql_request
from ..templates import TemplateLoadError, TemplateStore, load_templates, template_to_doc
from ..viz import (
    PLOT,
    PlanningError,
    decide_representation,
    plan_chart,
    summarize_results,
)
from .config import ServiceConfig
from .schemas import (
    AskRequest,
    AskResponse,
    EtlRequest,
    EtlResponse,
    HealthResponse,
    TemplatesLoadResponse,
    TemplatesResponse,
)

logger = logging.getLogger(__name__)

PROBE_TIMEOUT = 2.0


def _error(status: int, code: str, message: str, detail: Optional[dict] = None) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"code": code, "message": message, "detail": detail})


class AppState:
    """Owns gateways, the SPARQL client and the swappable corpus snapshot."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.embedded_store: Optional[MemoryTripleStore] = None
        if config.sparql_endpoint == "embedded":
            self.embedded_store = MemoryTripleStore()
            self.sparql = SparqlHttpClient(
                EMBEDDED_ENDPOINT_URL,
                timeout=config.sparql_timeout,
                transport=EmbeddedSparqlTransport(self.embedded_store),
            )
        else:
            self.sparql = SparqlHttpClient(config.sparql_endpoint, timeout=config.sparql_timeout)

        if config.use_mock_embeddings:
            self.embeddings = MockEmbeddingGateway(dim=config.embed_dim, seed=config.seed)
        else:
            self.embeddings = HttpEmbeddingGateway(
                config.embed_url, config.embed_model or "default",
                dim=config.embed_dim, timeout=config.sparql_timeout,
            )

        if config.ontology:
            self.ontology: OntologySchema = load_ontology(config.ontology)
        else:
            self.ontology = OntologySchema()

        self.store: Optional[TemplateStore] = None
        self._swap_lock = threading.Lock()
        if config.templates:
            self.replace_corpus(load_templates(config.templates))

    def replace_corpus(self, templates) -> int:
        """Build a fresh snapshot, then swap it in atomically."""
        snapshot = TemplateStore(
            templates, self.embeddings, mode=self.config.mode,
            metric=self.config.metric, seed=self.config.seed,
        )
        with self._swap_lock:
            self.store = snapshot
        return len(snapshot)

    def make_llm(self) -> LlmGateway:
        """Mock replay gateways are re-read per call so identical requests replay
        identical scripts."""
        if self.config.use_mock_llm:
            return ScriptedLlmGateway.from_file(self.config.mock_replay)
        if not self.config.llm_url:
            raise StateError("no LLM configured: set SPARQLLM_LLM_URL or SPARQLLM_MOCK_REPLAY")
        return HttpLlmGateway(
            self.config.llm_url, self.config.llm_model,
            temperature=self.config.temperature, timeout=self.config.llm_timeout,
        )


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    state = AppState(config)

    app = FastAPI(title="sparqllm", version="0.1.0")
    app.state.ctx = state
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[config.cors_origin] if config.cors_origin != "*" else ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(Exception)
    async def unhandled(request: Request, exc: Exception):
        logger.exception("unhandled error on %s", request.url.path)
        return _error(500, "internal", str(exc))

    # -- pipeline ---------------------------------------------------------
    @app.post("/api/ask", response_model=AskResponse)
    def ask(body: AskRequest):
        question = (body.question or "").strip()
        if not question:
            return _error(400, "empty_question", "question must not be empty")
        snapshot = state.store
        if snapshot is None or len(snapshot) == 0:
            return _error(409, "no_templates", "no template corpus indexed; POST /api/templates first")

        overrides = body.overrides
        gen_config = GenerationConfig(
            n_templates=(overrides.n_templates if overrides and overrides.n_templates
                         else state.config.n_templates),
            max_attempts=(overrides.max_attempts if overrides and overrides.max_attempts
                          else state.config.max_attempts),
        )
        try:
            llm = state.make_llm()
        except StateError as exc:
            return _error(502, "llm_unconfigured", str(exc))

        generator = QueryGenerator(
            llm=llm, sparql=state.sparql, ontology_text=state.ontology.serialized_text,
            store=snapshot, config=gen_config,
        )
        try:
            results, trace = generator.generate(question)
        except GenerationExhausted as exc:
            return _error(422, "generation_exhausted", str(exc),
                          detail={"trace": exc.trace.to_json()})
        except TransportError as exc:
            return _error(502, "llm_transport", str(exc))
        except QueryError as exc:
            status = 504 if exc.kind == "timeout" else 502
            return _error(status, f"sparql_{exc.kind}", str(exc))
        except SparqllmError as exc:
            return _error(422, "pipeline", str(exc))

        summary = summarize_results(results)
        representation = decide_representation(question, trace.final_query or "", summary)
        chart_spec = None
        if representation == PLOT:
            try:
                chart_spec = plan_chart(question, trace.final_query or "", results, summary).to_json()
            except PlanningError as exc:
                logger.warning("chart planning failed (%s); presenting as table", exc)
                representation = "TABLE"

        return {
            "sparql": trace.final_query or "",
            "trace": trace.to_json(),
            "results": results.to_json(),
            "representation": representation,
            "chart_spec": chart_spec,
            "summary": summary.to_json(),
        }

    # -- corpus management --------------------------------------------------
    @app.get("/api/templates", response_model=TemplatesResponse)
    def get_templates():
        snapshot = state.store
        templates = snapshot.templates if snapshot else []
        return {"count": len(templates), "templates": [template_to_doc(t) for t in templates]}

    @app.post("/api/templates", response_model=TemplatesLoadResponse)
    async def post_templates(request: Request):
        raw = (await request.body()).decode("utf-8", errors="replace")
        try:
            templates = load_templates(raw.splitlines())
        except TemplateLoadError as exc:
            return _error(422, "invalid_corpus", "corpus failed validation",
                          detail={"issues": exc.issues})
        if not templates:
            return _error(422, "invalid_corpus", "corpus is empty")
        loaded = state.replace_corpus(templates)
        return {"loaded": loaded}

    # -- ETL -----------------------------------------------------------------
    @app.post("/api/etl", response_model=EtlResponse)
    def etl(body: EtlRequest):
        try:
            rows = read_csv(body.csv_path)
            mapping = load_mapping(body.mapping_path)
        except FileNotFoundError as exc:
            return _error(422, "etl_input", f"file not readable: {exc}")
        except SparqllmError as exc:
            return _error(422, "etl_mapping", str(exc))

        issues = 0
        if body.cleaning_path:
            try:
                rules = load_cleaning_rules(json.loads(Path(body.cleaning_path).read_text(encoding="utf-8")))
            except (FileNotFoundError, ValueError, SparqllmError) as exc:
                return _error(422, "etl_cleaning", f"bad cleaning config: {exc}")
            rows, report = clean_rows(rows, rules)
            issues = len(report.issues)

        try:
            check_placeholders(rows, mapping)
            triples = apply_mapping(rows, mapping)
        except SparqllmError as exc:
            return _error(422, "etl_mapping", str(exc))
        mismatches = state.ontology.check_mapping_alignment(mapping)
        for note in mismatches:
            logger.warning("ontology alignment: %s", note)
        try:
            report = state.sparql.insert_triples(triples) if triples else None
        except QueryError as exc:
            status = 504 if exc.kind == "timeout" else 502
            return _error(status, f"sparql_{exc.kind}", str(exc))
        return {
            "inserted": report.inserted if report else 0,
            "failed": report.failed if report else 0,
            "cleaning_issues": issues,
            "store_triples": state.sparql.count_triples(),
        }

    # -- health ----------------------------------------------------------------
    @app.get("/api/health", response_model=HealthResponse)
    def health():
        warnings = []
        probe = SparqlHttpClient(
            state.sparql.endpoint, timeout=PROBE_TIMEOUT,
            transport=(EmbeddedSparqlTransport(state.embedded_store)
                       if state.embedded_store is not None else None),
        )
        try:
            probe.query("SELECT ?s WHERE { ?s ?p ?o } LIMIT 0")
            sparql_status = "ok"
        except SparqllmError as exc:
            sparql_status = "fail"
            warnings.append(f"sparql endpoint: {exc}")
        finally:
            probe.close()

        if state.config.use_mock_llm:
            llm_status = "mock"
        elif state.config.llm_url:
            try:
                httpx.get(state.config.llm_url, timeout=PROBE_TIMEOUT)
                llm_status = "ok"
            except httpx.HTTPError as exc:
                llm_status = "fail"
                warnings.append(f"llm endpoint: {exc}")
        else:
            llm_status = "fail"
            warnings.append("no LLM configured")

        count = len(state.store) if state.store else 0
        if count == 0:
            warnings.append("no templates indexed")
        status = "ok" if sparql_status == "ok" else "degraded"
        return {"status": status, "sparql_endpoint": sparql_status,
                "llm": llm_status, "templates": count, "warnings": warnings}

    # -- embedded SPARQL endpoint (available when configured) -------------------
    if state.embedded_store is not None:
        @app.post("/sparql")
        async def sparql_post(request: Request) -> Response:
            return await handle_sparql_request(state.embedded_store, request)

        @app.get("/sparql")
        async def sparql_get(request: Request) -> Response:
            return await handle_sparql_request(state.embedded_store, request)

    return app
