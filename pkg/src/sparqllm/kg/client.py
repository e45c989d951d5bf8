"""SPARQL 1.1 protocol client: query execution and triple loading over HTTP."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

import httpx

from ..errors import SparqllmError
from .results import SparqlResultSet
from .terms import Literal, Triple, XSD_BOOLEAN, format_triple

logger = logging.getLogger(__name__)

QUERY_MEDIA = "application/sparql-query"
UPDATE_MEDIA = "application/sparql-update"
RESULTS_MEDIA = "application/sparql-results+json"

INSERT_BATCH = 1000


class QueryError(SparqllmError):
    """Raised when query execution fails; kind is one of syntax/timeout/transport."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind

    def __str__(self):
        return f"[{self.kind}] {super().__str__()}"


@dataclass
class LoadReport:
    inserted: int = 0
    failed: int = 0


class SparqlHttpClient:
    """Client for one endpoint URL; ``transport`` is injectable for tests."""

    def __init__(self, endpoint: str, timeout: float = 30.0,
                 transport: Optional[httpx.BaseTransport] = None):
        if not endpoint:
            raise ValueError("endpoint URL must not be empty")
        self.endpoint = endpoint
        self.timeout = timeout
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def close(self):
        self._client.close()

    def query(self, sparql: str) -> SparqlResultSet:
        if not sparql or not sparql.strip():
            raise QueryError("syntax", "empty query")
        try:
            response = self._client.post(
                self.endpoint,
                content=sparql.encode("utf-8"),
                headers={"Content-Type": QUERY_MEDIA, "Accept": RESULTS_MEDIA},
            )
        except httpx.TimeoutException as exc:
            raise QueryError("timeout", f"query timed out after {self.timeout}s: {exc}") from exc
        except httpx.HTTPError as exc:
            raise QueryError("transport", f"endpoint unreachable: {exc}") from exc
        if response.status_code == 400:
            raise QueryError("syntax", response.text)
        if response.status_code >= 300:
            raise QueryError("transport", f"HTTP {response.status_code}: {response.text[:500]}")
        try:
            doc = response.json()
        except ValueError as exc:
            raise QueryError("transport", f"endpoint returned non-JSON body: {exc}") from exc
        if "boolean" in doc and "results" not in doc:
            return SparqlResultSet(
                variables=["boolean"],
                bindings=[[Literal("true" if doc["boolean"] else "false", XSD_BOOLEAN)]],
            )
        try:
            return SparqlResultSet.from_json(doc)
        except ValueError as exc:
            raise QueryError("transport", str(exc)) from exc

    def update(self, update: str) -> None:
        try:
            response = self._client.post(
                self.endpoint,
                content=update.encode("utf-8"),
                headers={"Content-Type": UPDATE_MEDIA},
            )
        except httpx.TimeoutException as exc:
            raise QueryError("timeout", f"update timed out after {self.timeout}s: {exc}") from exc
        except httpx.HTTPError as exc:
            raise QueryError("transport", f"endpoint unreachable: {exc}") from exc
        if response.status_code == 400:
            raise QueryError("syntax", response.text)
        if response.status_code >= 300:
            raise QueryError("transport", f"HTTP {response.status_code}: {response.text[:500]}")

    def insert_triples(self, triples: Iterable[Triple]) -> LoadReport:
        batch: list[str] = []
        report = LoadReport()
        for triple in triples:
            batch.append(format_triple(triple))
            if len(batch) >= INSERT_BATCH:
                self._flush(batch, report)
        if batch:
            self._flush(batch, report)
        return report

    def _flush(self, batch: list[str], report: LoadReport):
        statements = "\n".join(batch)
        try:
            self.update(f"INSERT DATA {{\n{statements}\n}}")
            report.inserted += len(batch)
        except QueryError:
            report.failed += len(batch)
            batch.clear()
            raise
        batch.clear()

    def count_triples(self) -> int:
        result = self.query("SELECT (COUNT(*) AS ?n) WHERE { ?s ?p ?o }")
        cell = result.bindings[0][0]
        return int(cell.lexical)  # type: ignore[union-attr]


def execute_sparql(query: str, endpoint: str, timeout: float = 30.0,
                   transport: Optional[httpx.BaseTransport] = None) -> SparqlResultSet:
    """Run a query against a SPARQL endpoint and parse the JSON results."""
    client = SparqlHttpClient(endpoint, timeout=timeout, transport=transport)
    try:
        return client.query(query)
    finally:
        client.close()


def load_triples(triples: list[Triple], endpoint: str, timeout: float = 30.0,
                 transport: Optional[httpx.BaseTransport] = None) -> LoadReport:
    """Upload triples via SPARQL 1.1 Update; no network call for an empty list."""
    if not triples:
        return LoadReport()
    client = SparqlHttpClient(endpoint, timeout=timeout, transport=transport)
    try:
        report = client.insert_triples(triples)
    finally:
        client.close()
    logger.info("loaded %d triples into %s (%d failed)", report.inserted, endpoint, report.failed)
    return report
