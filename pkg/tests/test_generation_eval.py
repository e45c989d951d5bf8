import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparqllm.errors import InputError, UndefinedMetricError
from sparqllm.evaluation import (
    EvalOutcome,
    EvalSample,
    esr,
    hra,
    load_generation_dataset,
    rca,
    result_match,
    result_match_verbose,
    rmr,
    run_generation_eval,
)
from sparqllm.generation import GenerationConfig, QueryGenerator, ScriptedLlmGateway
from sparqllm.kg import Literal, SparqlResultSet

from conftest import DATA, embedded_client, load_mini_kg

XSD = "http://www.w3.org/2001/XMLSchema#"


def outcome(executed=True, count_correct=False, content_match=False, entity="E",
            complexity="SIMPLE", query_class="SELECT"):
    return EvalOutcome(sample_id="s", entity=entity, query_class=query_class,
                       complexity=complexity, executed=executed,
                       count_correct=count_correct, content_match=content_match)


# -- metric arithmetic -------------------------------------------------------------

def test_esr_19_of_24():
    outcomes = [outcome(True)] * 19 + [outcome(False)] * 5
    assert esr(outcomes) == pytest.approx(19 / 24)
    assert abs(esr(outcomes) * 100 - 79.2) < 0.05


def test_esr_bounds():
    assert esr([outcome(True)] * 3) == 1.0
    assert esr([outcome(False)] * 3) == 0.0
    with pytest.raises(UndefinedMetricError):
        esr([])


def test_rca_ratio():
    outcomes = [outcome(True, count_correct=True)] * 3 + [outcome(True)] + [outcome(False)]
    assert rca(outcomes) == 0.75


def test_rca_undefined_when_nothing_executed():
    with pytest.raises(UndefinedMetricError):
        rca([outcome(False)] * 4)


def test_rmr_values():
    outcomes = [outcome(True, content_match=True)] * 16 + [outcome(True)] * 8
    assert rmr(outcomes) == pytest.approx(16 / 24)
    assert rmr([outcome(True)] * 2) == 0.0
    with pytest.raises(UndefinedMetricError):
        rmr([outcome(False)])


def test_outcome_invariant_match_requires_executed():
    with pytest.raises(InputError):
        EvalOutcome(sample_id="x", entity="E", query_class="SELECT", complexity="SIMPLE",
                    executed=False, content_match=True)


def test_hra_qwen_values():
    assert hra(1.0, 0.667) == pytest.approx(0.800, abs=1e-3)


def test_hra_identity_and_zero():
    for x in (0.0, 0.25, 0.5, 1.0):
        assert hra(x, x) == pytest.approx(x)
    assert hra(0.0, 0.7) == 0.0
    assert hra(0.0, 0.0) == 0.0


def test_hra_input_validation():
    with pytest.raises(InputError):
        hra(1.2, 0.5)
    with pytest.raises(InputError):
        hra(0.5, -0.1)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=0, max_value=1), st.floats(min_value=0, max_value=1))
def test_hra_bounds(e, r):
    value = hra(e, r)
    assert 0.0 <= value <= (e + r) / 2 + 1e-12
    assert value <= 2 * min(e, r) + 1e-12


# -- result matching ------------------------------------------------------------------

def rs(variables, rows):
    return SparqlResultSet(variables=variables, bindings=rows)


def lit(v, dt="string"):
    return Literal(v, XSD + dt)


def test_match_identical():
    a = rs(["x"], [[lit("1", "integer")], [lit("2", "integer")]])
    assert result_match(a, a)


def test_match_shuffled_rows():
    a = rs(["x", "y"], [[lit("1", "integer"), lit("a")], [lit("2", "integer"), lit("b")]])
    b = rs(["x", "y"], [[lit("2", "integer"), lit("b")], [lit("1", "integer"), lit("a")]])
    assert result_match(a, b)


def test_match_renamed_variable():
    a = rs(["x"], [[lit("v1")], [lit("v2")], [lit("v3")]])
    b = rs(["y"], [[lit("v1")], [lit("v2")], [lit("v3")]])
    assert result_match(a, b)


def test_match_swapped_columns():
    a = rs(["n", "v"], [[lit("one"), lit("1", "integer")], [lit("two"), lit("2", "integer")]])
    b = rs(["v", "n"], [[lit("1", "integer"), lit("one")], [lit("2", "integer"), lit("two")]])
    assert result_match(a, b)


def test_numeric_equality_across_datatypes():
    a = rs(["x"], [[lit("20.5", "double")]])
    b = rs(["x"], [[lit("20.50", "decimal")]])
    assert result_match(a, b)


def test_temporal_equality_across_forms():
    a = rs(["t"], [[lit("2024-02-01T08:00:00", "dateTime")]])
    b = rs(["t"], [[lit("2024-02-01 08:00:00", "dateTime")]])
    assert result_match(a, b)


def test_string_comparison_is_exact():
    a = rs(["s"], [[lit("x")]])
    b = rs(["s"], [[lit("x ")]])
    assert not result_match(a, b)


def test_mismatch_row_count():
    a = rs(["x"], [[lit("1", "integer")]])
    b = rs(["x"], [[lit("1", "integer")], [lit("2", "integer")]])
    report = result_match_verbose(a, b)
    assert not report.matched
    assert "row count" in report.diagnostic


def test_mismatch_column_count():
    a = rs(["x"], [[lit("1")]])
    b = rs(["x", "y"], [[lit("1"), lit("2")]])
    assert not result_match(a, b)


def test_mismatch_values_diagnostic_points_at_row():
    a = rs(["x", "y"], [[lit("1", "integer"), lit("9", "integer")],
                        [lit("2", "integer"), lit("8", "integer")]])
    b = rs(["x", "y"], [[lit("1", "integer"), lit("8", "integer")],
                        [lit("2", "integer"), lit("9", "integer")]])
    report = result_match_verbose(a, b)
    assert not report.matched
    assert report.diagnostic


def test_equal_signature_columns_resolved_by_permutation_search():
    # both columns hold {1,2}; coupling decides the alignment
    a = rs(["p", "q"], [[lit("1", "integer"), lit("2", "integer")],
                        [lit("2", "integer"), lit("1", "integer")]])
    b = rs(["u", "v"], [[lit("2", "integer"), lit("1", "integer")],
                        [lit("1", "integer"), lit("2", "integer")]])
    assert result_match(a, b)


def test_unbound_cells_participate():
    a = rs(["x"], [[None], [lit("1", "integer")]])
    b = rs(["x"], [[lit("1", "integer")], [None]])
    assert result_match(a, b)


def test_iri_vs_literal_not_equal():
    a = rs(["x"], [["http://example.org/1"]])
    b = rs(["x"], [[lit("http://example.org/1")]])
    assert not result_match(a, b)


def test_match_symmetry_and_reflexivity():
    a = rs(["x", "y"], [[lit("1", "integer"), lit("a")], [lit("2", "integer"), lit("b")]])
    b = rs(["u", "v"], [[lit("a"), lit("1", "integer")], [lit("b"), lit("2", "integer")]])
    assert result_match(a, a)
    assert result_match(b, b)
    assert result_match(a, b) == result_match(b, a)


def test_empty_result_sets_match():
    assert result_match(rs(["x"], []), rs(["y"], []))


# -- dataset + harness ------------------------------------------------------------------

def test_load_generation_dataset():
    samples = load_generation_dataset(DATA / "eval" / "generation.jsonl")
    assert len(samples) == 12
    assert {s.entity for s in samples} == {"Observation", "Sensor", "ObservableProperty", "Platform"}
    assert {s.complexity for s in samples} == {"SIMPLE", "MEDIUM", "COMPLEX"}
    assert all(s.expected_results is not None for s in samples)


def test_query_class_derived_from_gold_query():
    sample = EvalSample(question="q", gold_query="SELECT ?s WHERE { ?s ?p ?o }",
                        entity="E", complexity="SIMPLE", expected_count=1)
    assert sample.query_class == "SELECT"
    sample = EvalSample(question="q", gold_query="SELECT ?s WHERE { FILTER(?x > 1) }",
                        entity="E", complexity="MEDIUM", expected_count=1)
    assert sample.query_class == "FILTER"
    sample = EvalSample(question="q", gold_query="SELECT ?s WHERE { ?s ?p ?o } GROUP BY ?s",
                        entity="E", complexity="COMPLEX", expected_count=1)
    assert sample.query_class == "GROUP_BY"


def make_e2e_generator(description_store, ontology, replay="e2e.json"):
    client = embedded_client()
    load_mini_kg(client)
    return QueryGenerator(
        llm=ScriptedLlmGateway.from_file(DATA / "replay" / replay),
        sparql=client, ontology_text=ontology.serialized_text, store=description_store,
        config=GenerationConfig(n_templates=2, max_attempts=3),
    )


def test_run_generation_eval_full_marks(description_store, ontology):
    samples = load_generation_dataset(DATA / "eval" / "generation.jsonl")
    generator = make_e2e_generator(description_store, ontology)
    report = run_generation_eval(samples, generator, config={"with_templates": True})
    assert report.overall["esr"] == 1.0
    assert report.overall["rca"] == 1.0
    assert report.overall["rmr"] == 1.0
    assert report.overall["hra"] == 1.0
    assert len(report.by_entity) == 4
    assert set(report.by_entity) == {"Observation", "Sensor", "ObservableProperty", "Platform"}
    assert set(report.by_complexity) == {"SIMPLE", "MEDIUM", "COMPLEX"}


def test_report_recompute_reproduces_headline(description_store, ontology):
    samples = load_generation_dataset(DATA / "eval" / "generation.jsonl")
    generator = make_e2e_generator(description_store, ontology)
    report = run_generation_eval(samples, generator, config={})
    overall_before = dict(report.overall)
    report.recompute()
    assert report.overall == overall_before


def test_report_json_and_text_render(description_store, ontology):
    samples = load_generation_dataset(DATA / "eval" / "generation.jsonl")[:3]
    generator = make_e2e_generator(description_store, ontology)
    report = run_generation_eval(samples, generator, config={"with_templates": True})
    doc = json.loads(report.to_json_text())
    assert "overall" in doc and "outcomes" in doc
    text = report.render_text()
    assert "ESR" in text and "overall" in text


def test_failures_become_outcomes_not_exceptions(description_store, ontology):
    samples = load_generation_dataset(DATA / "eval" / "generation.jsonl")[:2]
    generator = make_e2e_generator(description_store, ontology, replay="ask_fail3.json")
    report = run_generation_eval(samples, generator, config={})
    assert report.overall["executed"] == 0
    assert report.overall["esr"] == 0.0
    assert report.overall["rca"] is None
    assert report.overall["rmr"] is None
    assert report.overall["hra"] == 0.0
    assert all(o.error for o in report.outcomes)
