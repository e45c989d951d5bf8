from .terms import Literal, Triple, Term, format_triple, is_absolute_iri
from .results import SparqlResultSet
from .cleaning import CleaningRule, CleaningReport, RowSet, clean_rows, read_csv
from .mapping import MappingError, MappingRule, ObjectSpec, apply_mapping, check_placeholders, load_mapping
from .ontology import OntologySchema, load_ontology
from .client import LoadReport, QueryError, SparqlHttpClient, execute_sparql, load_triples

__all__ = [
    "Literal", "Triple", "Term", "format_triple", "is_absolute_iri",
    "SparqlResultSet",
    "CleaningRule", "CleaningReport", "RowSet", "clean_rows", "read_csv",
    "MappingError", "MappingRule", "ObjectSpec", "apply_mapping", "check_placeholders", "load_mapping",
    "OntologySchema", "load_ontology",
    "LoadReport", "QueryError", "SparqlHttpClient", "execute_sparql", "load_triples",
]
