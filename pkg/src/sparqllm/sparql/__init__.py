from .parser import SparqlSyntaxError, SyntaxIssue, parse_query, parse_update, validate_sparql
from .engine import MemoryTripleStore
from .endpoint import EMBEDDED_ENDPOINT_URL, EmbeddedSparqlTransport, create_sparql_app, handle_sparql_request

__all__ = [
    "SparqlSyntaxError",
    "SyntaxIssue",
    "parse_query",
    "parse_update",
    "validate_sparql",
    "MemoryTripleStore",
    "EMBEDDED_ENDPOINT_URL",
    "EmbeddedSparqlTransport",
    "create_sparql_app",
    "handle_sparql_request",
]
