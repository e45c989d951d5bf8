import httpx
import pytest

from sparqllm.kg import Literal, QueryError, SparqlHttpClient, Triple, execute_sparql, load_triples
from sparqllm.sparql import EMBEDDED_ENDPOINT_URL, EmbeddedSparqlTransport, MemoryTripleStore

from conftest import embedded_client

XSD = "http://www.w3.org/2001/XMLSchema#"
EX = "http://example.org/kg/"


def make_triples(n):
    return [Triple(f"{EX}r{i}", f"{EX}value", Literal(str(i), XSD + "integer")) for i in range(n)]


def test_load_then_count():
    client = embedded_client()
    report = client.insert_triples(make_triples(30))
    assert (report.inserted, report.failed) == (30, 0)
    assert client.count_triples() == 30


def test_double_load_is_idempotent():
    client = embedded_client()
    triples = make_triples(30)
    load_triples(triples, client.endpoint, transport=EmbeddedSparqlTransport(client.store))
    load_triples(triples, client.endpoint, transport=EmbeddedSparqlTransport(client.store))
    assert client.count_triples() == 30


def test_empty_load_makes_no_network_call():
    class ExplodingTransport(httpx.BaseTransport):
        def handle_request(self, request):
            raise AssertionError("no network call expected")

    report = load_triples([], "http://unused.example/sparql", transport=ExplodingTransport())
    assert (report.inserted, report.failed) == (0, 0)


def test_execute_preserves_variable_order():
    client = embedded_client()
    client.insert_triples(make_triples(2))
    result = client.query(f"SELECT ?b ?a WHERE {{ ?a <{EX}value> ?b }} ORDER BY ?b")
    assert result.variables == ["b", "a"]


def test_limit_zero():
    client = embedded_client()
    client.insert_triples(make_triples(3))
    result = client.query("SELECT ?s WHERE { ?s ?p ?o } LIMIT 0")
    assert result.row_count == 0
    assert result.variables == ["s"]


def test_syntax_error_from_endpoint():
    client = embedded_client()
    with pytest.raises(QueryError) as err:
        client.query("SELEC ?s")
    assert err.value.kind == "syntax"


def test_empty_query_rejected_client_side():
    client = embedded_client()
    with pytest.raises(QueryError) as err:
        client.query("  ")
    assert err.value.kind == "syntax"


def test_timeout_maps_to_query_error():
    class SlowTransport(httpx.BaseTransport):
        def handle_request(self, request):
            raise httpx.ReadTimeout("simulated", request=request)

    client = SparqlHttpClient("http://slow.example/sparql", timeout=0.1,
                              transport=SlowTransport())
    with pytest.raises(QueryError) as err:
        client.query("SELECT ?s WHERE { ?s ?p ?o }")
    assert err.value.kind == "timeout"


def test_transport_failure():
    class DownTransport(httpx.BaseTransport):
        def handle_request(self, request):
            raise httpx.ConnectError("refused", request=request)

    client = SparqlHttpClient("http://down.example/sparql", transport=DownTransport())
    with pytest.raises(QueryError) as err:
        client.query("SELECT ?s WHERE { ?s ?p ?o }")
    assert err.value.kind == "transport"


def test_http_error_status_is_protocol_error():
    class ErrorTransport(httpx.BaseTransport):
        def handle_request(self, request):
            return httpx.Response(503, text="service unavailable")

    client = SparqlHttpClient("http://err.example/sparql", transport=ErrorTransport())
    with pytest.raises(QueryError) as err:
        client.update("INSERT DATA { <http://e/a> <http://e/p> 1 }")
    assert err.value.kind == "transport"
    assert "503" in str(err.value)


def test_execute_sparql_helper():
    store = MemoryTripleStore()
    store.add_many(make_triples(5))
    result = execute_sparql("SELECT (COUNT(*) AS ?n) WHERE { ?s ?p ?o }",
                            EMBEDDED_ENDPOINT_URL, transport=EmbeddedSparqlTransport(store))
    assert result.bindings[0][0].lexical == "5"


def test_datatypes_round_trip_through_protocol():
    client = embedded_client()
    client.insert_triples([
        Triple(EX + "m", EX + "temp", Literal("20.5", XSD + "double")),
        Triple(EX + "m", EX + "when", Literal("2024-02-01T08:00:00", XSD + "dateTime")),
        Triple(EX + "m", EX + "tag", Literal("plain")),
        Triple(EX + "m", EX + "peer", EX + "n"),
    ])
    result = client.query(f"SELECT ?o WHERE {{ <{EX}m> ?p ?o }} ORDER BY ?o")
    cells = result.column("o")
    datatypes = {c.datatype for c in cells if isinstance(c, Literal)}
    assert XSD + "double" in datatypes
    assert XSD + "dateTime" in datatypes
    assert XSD + "string" in datatypes
    assert EX + "n" in cells
