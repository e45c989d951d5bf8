import pytest

from sparqllm.kg import (
    Literal,
    MappingError,
    MappingRule,
    ObjectSpec,
    RowSet,
    apply_mapping,
    check_placeholders,
    is_absolute_iri,
    load_mapping,
)

XSD_DOUBLE = "http://www.w3.org/2001/XMLSchema#double"


def rule_temp():
    return MappingRule(
        subject_template="http://example.org/sensor/{id}",
        predicate="http://example.org/hasTemp",
        object=ObjectSpec(column="temp", datatype=XSD_DOUBLE),
    )


def test_single_rule_application():
    rows = RowSet(columns=["id", "temp"], rows=[["s1", "20.5"]])
    triples = apply_mapping(rows, [rule_temp()])
    assert len(triples) == 1
    t = triples[0]
    assert t.subject == "http://example.org/sensor/s1"
    assert t.predicate == "http://example.org/hasTemp"
    assert t.object == Literal("20.5", XSD_DOUBLE)


def test_cardinality_product():
    rows = RowSet(columns=["id", "a", "b", "c"],
                  rows=[[f"r{i}", "1", "2", "3"] for i in range(10)])
    rules = [
        MappingRule(f"http://example.org/e/{{id}}", f"http://example.org/p{j}",
                    ObjectSpec(column=col, datatype=XSD_DOUBLE))
        for j, col in enumerate(["a", "b", "c"])
    ]
    assert len(apply_mapping(rows, rules)) == 30


def test_empty_object_cell_skips_rule():
    rows = RowSet(columns=["id", "temp"], rows=[["s1", ""]])
    assert apply_mapping(rows, [rule_temp()]) == []


def test_unresolvable_placeholder_names_rule_and_column():
    rows = RowSet(columns=["temp"], rows=[["20.5"]])
    with pytest.raises(MappingError) as err:
        apply_mapping(rows, [rule_temp()])
    assert "{id}" in str(err.value)
    assert err.value.column == "id"


def test_check_placeholders_fails_fast():
    rows = RowSet(columns=["temp"], rows=[])
    with pytest.raises(MappingError):
        check_placeholders(rows, [rule_temp()])


def test_percent_encoding_of_reserved_characters():
    rows = RowSet(columns=["id", "temp"], rows=[["a b/c#d", "1"]])
    triples = apply_mapping(rows, [rule_temp()])
    assert triples[0].subject == "http://example.org/sensor/a%20b%2Fc%23d"
    assert is_absolute_iri(triples[0].subject)


def test_every_subject_parses_as_iri():
    rows = RowSet(columns=["id", "temp"],
                  rows=[[v, "1"] for v in ["x", "ü", "{weird}", "a?b=c", "100%"]])
    for t in apply_mapping(rows, [rule_temp()]):
        assert is_absolute_iri(t.subject)


def test_determinism_identical_inputs_identical_output():
    rows = RowSet(columns=["id", "temp"], rows=[["s1", "1"], ["s2", "2"]])
    rules = [rule_temp()]
    assert apply_mapping(rows, rules) == apply_mapping(rows, rules)


def test_constant_and_iri_template_objects():
    rows = RowSet(columns=["id", "kind"], rows=[["s1", "soil"]])
    rules = [
        MappingRule("http://example.org/sensor/{id}",
                    "http://www.w3.org/1999/02/22-rdf-syntax-ns#type",
                    ObjectSpec(constant="http://example.org/Sensor")),
        MappingRule("http://example.org/sensor/{id}",
                    "http://example.org/kind",
                    ObjectSpec(iri_template="http://example.org/kind/{kind}")),
    ]
    triples = apply_mapping(rows, rules)
    assert triples[0].object == "http://example.org/Sensor"
    assert triples[1].object == "http://example.org/kind/soil"


def test_load_mapping_from_json(tmp_path):
    doc = """[
      {"subject_template": "http://example.org/r/{id}",
       "predicate": "http://example.org/v",
       "object": {"column": "v", "datatype": "http://www.w3.org/2001/XMLSchema#decimal"}},
      {"subject_template": "http://example.org/r/{id}",
       "predicate": "http://example.org/t",
       "object": {"constant": "static text"}}
    ]"""
    path = tmp_path / "mapping.json"
    path.write_text(doc)
    rules = load_mapping(path)
    assert len(rules) == 2
    assert rules[0].object.column == "v"
    assert rules[1].object.constant == Literal("static text")


def test_load_mapping_rejects_bad_rule(tmp_path):
    path = tmp_path / "mapping.json"
    path.write_text('[{"subject_template": "http://e.org/{id}", "predicate": "not-an-iri", "object": {"constant": "x"}}]')
    with pytest.raises(MappingError):
        load_mapping(path)


def test_object_spec_requires_exactly_one_source():
    with pytest.raises(Exception):
        ObjectSpec(column="a", constant="b")
