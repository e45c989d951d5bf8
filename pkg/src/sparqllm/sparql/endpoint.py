"""SPARQL 1.1 protocol facade over the in-process store.

POST /sparql with ``application/sparql-query`` returns
``application/sparql-results+json``; ``application/sparql-update`` returns 204.
Form-encoded ``query=``/``update=`` bodies are accepted as well.  The httpx
transport variant routes the same protocol in-process, so client code runs
unchanged against the embedded store.
"""

from __future__ import annotations

import json
from typing import Optional
from urllib.parse import parse_qs

import httpx
from fastapi import FastAPI, Request, Response

from .engine import MemoryTripleStore
from .parser import SparqlSyntaxError

RESULTS_JSON = "application/sparql-results+json"

EMBEDDED_ENDPOINT_URL = "http://embedded.local/sparql"


def _dispatch(store: MemoryTripleStore, content_type: str, body: str,
              query_param: Optional[str] = None) -> tuple[int, str, str]:
    """Shared protocol logic; returns (status, media_type, body)."""
    query_text = query_param
    update_text = None
    if content_type == "application/sparql-query":
        query_text = body
    elif content_type == "application/sparql-update":
        update_text = body
    elif content_type == "application/x-www-form-urlencoded":
        form = parse_qs(body)
        query_text = (form.get("query") or [query_text])[0]
        update_text = (form.get("update") or [None])[0]
    elif query_param is None:
        return 415, "text/plain", "unsupported content type"

    try:
        if update_text is not None:
            store.update(update_text)
            return 204, "text/plain", ""
        if query_text is None:
            return 400, "text/plain", "missing query"
        result = store.query(query_text)
    except SparqlSyntaxError as exc:
        return 400, "text/plain", f"syntax error at {exc.position}: {exc}"
    if isinstance(result, bool):
        return 200, RESULTS_JSON, json.dumps({"head": {}, "boolean": result})
    return 200, RESULTS_JSON, json.dumps(result.to_json())


class EmbeddedSparqlTransport(httpx.BaseTransport):
    """Routes SparqlHttpClient requests straight into a MemoryTripleStore."""

    def __init__(self, store: MemoryTripleStore):
        self.store = store

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        content_type = request.headers.get("content-type", "").split(";")[0].strip().lower()
        body = request.read().decode("utf-8", errors="replace")
        status, media_type, payload = _dispatch(self.store, content_type, body)
        return httpx.Response(status, content=payload.encode("utf-8"),
                              headers={"Content-Type": media_type})


async def handle_sparql_request(store: MemoryTripleStore, request: Request) -> Response:
    if request.method == "GET":
        query_param = request.query_params.get("query")
        status, media_type, payload = _dispatch(store, "", "", query_param)
    else:
        content_type = request.headers.get("content-type", "").split(";")[0].strip().lower()
        body = (await request.body()).decode("utf-8", errors="replace")
        status, media_type, payload = _dispatch(store, content_type, body)
    if status == 204:
        return Response(status_code=204)
    return Response(payload, status_code=status, media_type=media_type)


def create_sparql_app(store: MemoryTripleStore) -> FastAPI:
    app = FastAPI(title="embedded-sparql-endpoint", docs_url=None, redoc_url=None)
    app.state.store = store

    @app.post("/sparql")
    async def sparql_post(request: Request) -> Response:
        return await handle_sparql_request(store, request)

    @app.get("/sparql")
    async def sparql_get(request: Request) -> Response:
        return await handle_sparql_request(store, request)

    return app
