"""RDF term model: IRIs are plain strings, literals carry a lexical form and datatype."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union
from urllib.parse import quote

XSD = "http://www.w3.org/2001/XMLSchema#"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"

XSD_STRING = XSD + "string"
XSD_INTEGER = XSD + "integer"
XSD_DECIMAL = XSD + "decimal"
XSD_DOUBLE = XSD + "double"
XSD_BOOLEAN = XSD + "boolean"
XSD_DATE = XSD + "date"
XSD_DATETIME = XSD + "dateTime"

NUMERIC_DATATYPES = frozenset(
    XSD + local
    for local in (
        "integer", "decimal", "double", "float", "int", "long", "short", "byte",
        "nonNegativeInteger", "positiveInteger", "nonPositiveInteger",
        "negativeInteger", "unsignedInt", "unsignedLong", "unsignedShort",
        "unsignedByte",
    )
)
TEMPORAL_DATATYPES = frozenset({XSD_DATE, XSD_DATETIME})

# scheme ":" then at least one non-space character, per RFC 3987 absolute IRIs
_ABSOLUTE_IRI = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:\S+$")


def is_absolute_iri(value: str) -> bool:
    return bool(_ABSOLUTE_IRI.match(value)) and not any(c in value for c in '<>"{}|\\^`')


def pct_encode(value: str) -> str:
    """Percent-encode a cell value for safe use inside an IRI template."""
    return quote(value, safe="")


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: str = XSD_STRING

    def __post_init__(self):
        if not is_absolute_iri(self.datatype):
            raise ValueError(f"literal datatype is not an absolute IRI: {self.datatype!r}")


# an RDF term in object position: IRI (str) or Literal
Term = Union[str, Literal]


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    object: Term = field()

    def __post_init__(self):
        if not self.subject or not is_absolute_iri(self.subject):
            raise ValueError(f"triple subject is not an absolute IRI: {self.subject!r}")
        if not self.predicate or not is_absolute_iri(self.predicate):
            raise ValueError(f"triple predicate is not an absolute IRI: {self.predicate!r}")
        if isinstance(self.object, str):
            if not self.object or not is_absolute_iri(self.object):
                raise ValueError(f"triple object IRI is invalid: {self.object!r}")
        elif not isinstance(self.object, Literal):
            raise ValueError(f"triple object must be an IRI string or Literal, got {type(self.object)}")


_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def escape_string(value: str) -> str:
    return "".join(_ESCAPES.get(c, c) for c in value)


def format_term(term: Term) -> str:
    """Render a term in N-Triples syntax (used for INSERT DATA payloads)."""
    if isinstance(term, Literal):
        lex = escape_string(term.lexical)
        if term.datatype == XSD_STRING:
            return f'"{lex}"'
        return f'"{lex}"^^<{term.datatype}>'
    return f"<{term}>"


def format_triple(triple: Triple) -> str:
    return f"<{triple.subject}> <{triple.predicate}> {format_term(triple.object)} ."
