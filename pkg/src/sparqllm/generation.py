"""Natural language to SPARQL: prompt assembly, LLM gateways, and the
validate-execute-repair loop that turns a question into working query results.
"""

from __future__ import annotations

import json
import logging
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol, Sequence, Union

import httpx

from .errors import SparqllmError, TransportError
from .kg.client import QueryError, SparqlHttpClient
from .kg.results import SparqlResultSet
from .sparql import validate_sparql

logger = logging.getLogger(__name__)

DEFAULT_MAX_ATTEMPTS = 3
NETWORK_RETRIES = 2


# ---------------------------------------------------------------------------
# Gateways

class LlmGateway(Protocol):
    def complete(self, prompt: str) -> str: ...


class LlmScriptExhausted(SparqllmError):
    pass


class ScriptedLlmGateway:
    """Replays a fixed list of responses in order; deterministic per position."""

    def __init__(self, responses: Sequence[str]):
        self.responses = list(responses)
        self.position = 0

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ScriptedLlmGateway":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if isinstance(doc, dict):
            doc = doc.get("responses", [])
        if not isinstance(doc, list) or not all(isinstance(x, str) for x in doc):
            raise ValueError(f"replay file {path} must hold a JSON array of strings")
        return cls(doc)

    def complete(self, prompt: str) -> str:
        if self.position >= len(self.responses):
            raise LlmScriptExhausted(
                f"scripted gateway ran out of responses after {self.position}"
            )
        text = self.responses[self.position]
        self.position += 1
        return text


class HttpLlmGateway:
    """POST {model, messages, temperature, max_tokens} -> {text}."""

    def __init__(self, url: str, model: str, temperature: float = 0.0,
                 max_tokens: int = 1024, timeout: float = 60.0,
                 transport: Optional[httpx.BaseTransport] = None):
        self.url = url
        self.model = model
        self.temperature = temperature
        self.max_tokens = max_tokens
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def complete(self, prompt: str) -> str:
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }
        last_error: Optional[Exception] = None
        for attempt in range(NETWORK_RETRIES + 1):
            try:
                response = self._client.post(self.url, json=body)
                response.raise_for_status()
                payload = response.json()
                text = payload.get("text")
                if not isinstance(text, str):
                    raise ValueError(f"no 'text' field in LLM response: {str(payload)[:200]}")
                return text
            except (httpx.HTTPError, ValueError) as exc:
                last_error = exc
                logger.warning("LLM request failed (attempt %d/%d): %s",
                               attempt + 1, NETWORK_RETRIES + 1, exc)
        raise TransportError(f"LLM gateway failed: {last_error}", retries=NETWORK_RETRIES)


# ---------------------------------------------------------------------------
# Prompt assembly

@dataclass(frozen=True)
class PriorError:
    failed_query: str
    error: str


@dataclass
class PromptBundle:
    question: str
    templates: list[tuple[str, str]]  # (sparql_text, target)
    ontology_text: str
    prior_error: Optional[PriorError] = None


ROLE_INSTRUCTION = (
    "You are an expert SPARQL engineer. Write one SPARQL 1.1 query that answers "
    "the user's question against the knowledge graph described below. Use only "
    "classes and properties from the ontology."
)

OUTPUT_INSTRUCTION = (
    "Return exactly one SPARQL query inside a fenced code block:\n"
    "```sparql\n<your query>\n```\n"
    "No explanations outside the block."
)

REPAIR_INSTRUCTION = (
    "The previous attempt failed. Analyze the error, fix the query, and return "
    "the corrected query in the same fenced format."
)


def build_prompt(bundle: PromptBundle) -> str:
    """Deterministic prompt layout: role, ontology, templates, question, format, repair."""
    sections = [ROLE_INSTRUCTION, "== Ontology ==", bundle.ontology_text]
    if bundle.templates:
        sections.append("== Reference templates ==")
        for sparql_text, target in bundle.templates:
            sections.append(f"-- template ({target}) --\n{sparql_text}")
    sections.append("== Question ==")
    sections.append(bundle.question)
    sections.append("== Output format ==")
    sections.append(OUTPUT_INSTRUCTION)
    if bundle.prior_error is not None:
        sections.append("== Previous attempt failed ==")
        sections.append(f"Failed query:\n{bundle.prior_error.failed_query}")
        sections.append(f"Error:\n{bundle.prior_error.error}")
        sections.append(REPAIR_INSTRUCTION)
    return "\n\n".join(sections)


# ---------------------------------------------------------------------------
# Output extraction

class ExtractionError(SparqllmError):
    pass


_FENCE = re.compile(r"```[ \t]*([A-Za-z0-9_+-]*)[ \t]*\n(.*?)```", re.DOTALL)
_KEYWORD = re.compile(r"\b(PREFIX|SELECT|ASK)\b", re.IGNORECASE)


def extract_sparql(llm_output: str) -> str:
    """First fenced code block, else the suffix starting at a SPARQL keyword."""
    match = _FENCE.search(llm_output or "")
    if match:
        content = match.group(2).strip()
        if content:
            return content
    match = _KEYWORD.search(llm_output or "")
    if match:
        return llm_output[match.start():].strip()
    raise ExtractionError("no SPARQL query found in model output")


# ---------------------------------------------------------------------------
# Generation trace

@dataclass
class Attempt:
    query: str
    validation: Optional[str] = None  # None = ok, else the syntax/extraction error
    execution: Optional[str] = None   # None = ok, else the QueryError text
    duration: float = 0.0

    @property
    def ok(self) -> bool:
        return self.validation is None and self.execution is None

    def to_json(self, include_duration: bool = True) -> dict:
        doc = {"query": self.query, "validation": self.validation, "execution": self.execution}
        if include_duration:
            doc["duration"] = round(self.duration, 6)
        return doc


@dataclass
class GenerationTrace:
    attempts: list[Attempt] = field(default_factory=list)
    outcome: str = "EXHAUSTED"  # SUCCESS | EXHAUSTED
    final_query: Optional[str] = None

    def to_json(self, include_duration: bool = True) -> dict:
        return {
            "attempts": [a.to_json(include_duration) for a in self.attempts],
            "outcome": self.outcome,
            "final_query": self.final_query,
        }


class GenerationExhausted(SparqllmError):
    def __init__(self, trace: GenerationTrace):
        super().__init__(f"no valid query after {len(trace.attempts)} attempts")
        self.trace = trace


# ---------------------------------------------------------------------------
# The loop

@dataclass
class GenerationConfig:
    n_templates: int = 2
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    use_templates: bool = True


class QueryGenerator:
    """Retrieve once per question, then loop: prompt -> LLM -> extract -> validate -> execute."""

    def __init__(self, llm: LlmGateway, sparql: SparqlHttpClient, ontology_text: str,
                 store=None, config: Optional[GenerationConfig] = None):
        self.llm = llm
        self.sparql = sparql
        self.ontology_text = ontology_text
        self.store = store
        self.config = config or GenerationConfig()

    def retrieve(self, question: str) -> list[tuple[str, str]]:
        if not self.config.use_templates or self.store is None or len(self.store) == 0:
            return []
        hits = self.store.retrieve(question, n=self.config.n_templates)
        return [(t.sparql_text, t.target) for t, _ in hits]

    def generate(self, question: str) -> tuple[SparqlResultSet, GenerationTrace]:
        if not question or not question.strip():
            raise SparqllmError("question must not be empty")
        templates = self.retrieve(question)
        trace = GenerationTrace()
        prior: Optional[PriorError] = None

        for _ in range(self.config.max_attempts):
            bundle = PromptBundle(
                question=question,
                templates=templates,
                ontology_text=self.ontology_text,
                prior_error=prior,
            )
            started = time.perf_counter()
            output = self.llm.complete(build_prompt(bundle))

            try:
                query = extract_sparql(output)
            except ExtractionError as exc:
                attempt = Attempt(query=output.strip(), validation=str(exc),
                                  duration=time.perf_counter() - started)
                trace.attempts.append(attempt)
                prior = PriorError(failed_query=output.strip(), error=str(exc))
                continue

            issue = validate_sparql(query)
            if issue is not None:
                message = f"syntax error at {issue.position}: {issue.message}"
                attempt = Attempt(query=query, validation=message,
                                  duration=time.perf_counter() - started)
                trace.attempts.append(attempt)
                prior = PriorError(failed_query=query, error=message)
                continue

            try:
                results = self.sparql.query(query)
            except QueryError as exc:
                if exc.kind == "transport":
                    raise
                attempt = Attempt(query=query, execution=str(exc),
                                  duration=time.perf_counter() - started)
                trace.attempts.append(attempt)
                prior = PriorError(failed_query=query, error=str(exc))
                continue

            attempt = Attempt(query=query, duration=time.perf_counter() - started)
            trace.attempts.append(attempt)
            trace.outcome = "SUCCESS"
            trace.final_query = query
            return results, trace

        trace.outcome = "EXHAUSTED"
        raise GenerationExhausted(trace)
