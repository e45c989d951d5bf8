from __future__ import annotations

from pathlib import Path

import pytest

from sparqllm.embeddings import MockEmbeddingGateway
from sparqllm.kg import SparqlHttpClient, apply_mapping, load_mapping, read_csv
from sparqllm.kg.ontology import load_ontology
from sparqllm.sparql import EMBEDDED_ENDPOINT_URL, EmbeddedSparqlTransport, MemoryTripleStore
from sparqllm.templates import TemplateStore, load_templates

DATA = Path(__file__).resolve().parent.parent / "data"

MINI_KG_TABLES = ("platforms", "properties", "sensors", "observations")


def embedded_client(store: MemoryTripleStore | None = None) -> SparqlHttpClient:
    store = store or MemoryTripleStore()
    client = SparqlHttpClient(EMBEDDED_ENDPOINT_URL, transport=EmbeddedSparqlTransport(store))
    client.store = store  # keep the backing store reachable for assertions
    return client


def load_mini_kg(client: SparqlHttpClient) -> None:
    for name in MINI_KG_TABLES:
        rows = read_csv(DATA / "minikg" / f"{name}.csv")
        mapping = load_mapping(DATA / "minikg" / f"mapping_{name}.json")
        client.insert_triples(apply_mapping(rows, mapping))


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture
def mini_kg() -> SparqlHttpClient:
    client = embedded_client()
    load_mini_kg(client)
    return client


@pytest.fixture(scope="session")
def mock_gateway() -> MockEmbeddingGateway:
    return MockEmbeddingGateway(dim=64, seed=42)


@pytest.fixture(scope="session")
def corpus():
    return load_templates(DATA / "corpus.jsonl")


@pytest.fixture(scope="session")
def description_store(corpus, mock_gateway) -> TemplateStore:
    return TemplateStore(corpus, mock_gateway, mode="description", metric="cosine", seed=42)


@pytest.fixture(scope="session")
def ontology():
    return load_ontology(DATA / "ontology.json")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import CRITERION_RESULTS
    except ImportError:
        return
    if not CRITERION_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, elapsed in CRITERION_RESULTS:
        terminalreporter.write_line(f"ACCEPTANCE {name}: {status} ({elapsed:.2f}s)")
