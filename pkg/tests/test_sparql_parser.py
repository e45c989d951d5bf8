import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparqllm.sparql import SparqlSyntaxError, parse_query, parse_update, validate_sparql

XSD = "http://www.w3.org/2001/XMLSchema#"


def test_minimal_select_ok():
    assert validate_sparql("SELECT ?s WHERE { ?s ?p ?o }") is None


def test_unbalanced_brace():
    issue = validate_sparql("SELECT ?s WHERE { ?s ?p ?o")
    assert issue is not None
    assert "brace" in issue.message


def test_undeclared_prefix():
    issue = validate_sparql("SELECT ?s WHERE { ?s ioe:hasX ?o }")
    assert issue is not None
    assert "ioe" in issue.message
    assert issue.position > 0


def test_declared_prefix_ok():
    q = "PREFIX ioe: <http://example.org/ioe#>\nSELECT ?s WHERE { ?s ioe:hasX ?o }"
    assert validate_sparql(q) is None


def test_full_subset_query_ok():
    q = """
    PREFIX ioe: <http://example.org/ioe#>
    PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>
    SELECT DISTINCT ?s (AVG(?v) AS ?avg) WHERE {
      ?s a ioe:Observation ;
         ioe:hasValue ?v .
      OPTIONAL { ?s ioe:label ?lbl }
      FILTER(?v > 1.5 && REGEX(?lbl, "north", "i") || YEAR(?t) = 2024)
      ?s ioe:resultTime ?t .
    }
    GROUP BY ?s
    ORDER BY DESC(?avg) ?s
    LIMIT 10 OFFSET 2
    """
    assert validate_sparql(q) is None


def test_empty_query_rejected():
    assert validate_sparql("") is not None
    assert validate_sparql("   \n ") is not None


def test_junk_rejected_without_raising():
    assert validate_sparql("SELEC ?s") is not None
    assert validate_sparql("}{") is not None
    assert validate_sparql('"unterminated') is not None


def test_unknown_function_rejected():
    assert validate_sparql("SELECT ?s WHERE { ?s ?p ?o . FILTER(FROB(?s)) }") is not None


def test_unsupported_constructs_rejected():
    assert validate_sparql("SELECT ?s WHERE { { ?s ?p ?o } UNION { ?s ?p ?o } }") is not None
    assert validate_sparql("SELECT ?s WHERE { ?s ?p ?o } HAVING (?s > 1)") is not None


def test_aggregates_parse():
    for agg in ("COUNT(*)", "COUNT(DISTINCT ?v)", "SUM(?v)", "AVG(?v)", "MIN(?v)", "MAX(?v)"):
        q = f"SELECT ({agg} AS ?x) WHERE {{ ?s ?p ?v }}"
        assert validate_sparql(q) is None, agg


def test_semicolon_and_comma_lists():
    q = "SELECT ?s WHERE { ?s <http://e/p> ?a , ?b ; <http://e/q> ?c . }"
    parsed = parse_query(q)
    assert len(parsed.where) == 3


def test_numeric_and_typed_literals():
    q = ('PREFIX xsd: <http://www.w3.org/2001/XMLSchema#> '
         'SELECT ?s WHERE { ?s <http://e/p> 42 . ?s <http://e/q> -1.5 . '
         '?s <http://e/r> "2024-01-01T00:00:00"^^xsd:dateTime }')
    assert validate_sparql(q) is None


def test_comments_are_skipped():
    q = "# leading comment\nSELECT ?s # trailing\nWHERE { ?s ?p ?o } # end"
    assert validate_sparql(q) is None


def test_ask_parses():
    assert validate_sparql("ASK { ?s ?p ?o }") is None


def test_insert_data_update():
    ops = parse_update(
        'PREFIX ex: <http://e.org/> INSERT DATA { ex:a ex:p "v" . ex:b ex:q 4 }'
    )
    assert len(ops) == 1
    assert len(ops[0].triples) == 2
    assert ops[0].triples[0].subject == "http://e.org/a"


def test_update_rejects_variables_in_data():
    with pytest.raises(SparqlSyntaxError):
        parse_update("INSERT DATA { ?s <http://e/p> 1 }")


def test_syntax_error_carries_position():
    try:
        parse_query("SELECT ?s WHERE { ?s ?p ?o . FILTER( }")
    except SparqlSyntaxError as exc:
        assert exc.position > 0
    else:
        pytest.fail("expected SparqlSyntaxError")


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=120))
def test_validator_never_panics_on_arbitrary_text(text):
    issue = validate_sparql(text)
    assert issue is None or isinstance(issue.message, str)


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet="SELECT?sWHERE{}()<>\"'.;,#@^|&!= \n", max_size=80))
def test_validator_never_panics_on_sparql_shaped_noise(text):
    validate_sparql(text)
