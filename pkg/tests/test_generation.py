import httpx
import pytest

from sparqllm.errors import TransportError
from sparqllm.generation import (
    Attempt,
    ExtractionError,
    GenerationConfig,
    GenerationExhausted,
    GenerationTrace,
    HttpLlmGateway,
    PriorError,
    PromptBundle,
    QueryGenerator,
    ScriptedLlmGateway,
    build_prompt,
    extract_sparql,
)
from sparqllm.sparql import validate_sparql

from conftest import embedded_client, load_mini_kg

VALID_QUERY = ("PREFIX ioe: <http://example.org/ioe#>\n"
               "SELECT ?s ?v WHERE { ?s ioe:hasValue ?v }")


def bundle(**kwargs):
    defaults = dict(
        question="What are the sensor values?",
        templates=[("SELECT ?a WHERE { ?a ?b ?c }", "SELECT|Sensor"),
                   ("SELECT ?x WHERE { ?x ?y ?z }", "FILTER|Sensor")],
        ontology_text="Classes:\n  - Sensor",
        prior_error=None,
    )
    defaults.update(kwargs)
    return PromptBundle(**defaults)


# -- prompt assembly ------------------------------------------------------------

def test_prompt_contains_sections_in_order():
    prompt = build_prompt(bundle())
    ontology_at = prompt.index("Classes:")
    templates_at = prompt.index("SELECT ?a WHERE")
    question_at = prompt.index("What are the sensor values?")
    format_at = prompt.index("fenced code block")
    assert ontology_at < templates_at < question_at < format_at


def test_prompt_without_prior_error_lacks_repair_section():
    assert "Previous attempt failed" not in build_prompt(bundle())


def test_prompt_with_prior_error_has_repair_section():
    prompt = build_prompt(bundle(prior_error=PriorError("SELECT bad", "syntax error at 7")))
    assert "Previous attempt failed" in prompt
    assert "SELECT bad" in prompt
    assert "syntax error at 7" in prompt


def test_prompt_includes_templates_verbatim():
    b = bundle()
    prompt = build_prompt(b)
    for sparql_text, target in b.templates:
        assert sparql_text in prompt
        assert target in prompt


def test_prompt_deterministic():
    assert build_prompt(bundle()) == build_prompt(bundle())


def test_prompt_omits_template_section_when_empty():
    prompt = build_prompt(bundle(templates=[]))
    assert "Reference templates" not in prompt


# -- extraction --------------------------------------------------------------------

def test_extract_fenced_block():
    text = f"Here you go:\n```sparql\n{VALID_QUERY}\n```\nHope that helps."
    assert extract_sparql(text) == VALID_QUERY


def test_extract_fenced_block_without_language_tag():
    assert extract_sparql("```\nSELECT ?s WHERE { ?s ?p ?o }\n```") == "SELECT ?s WHERE { ?s ?p ?o }"


def test_extract_bare_keyword_suffix():
    text = "Sure, the query is SELECT ?s WHERE { ?s ?p ?o }"
    assert extract_sparql(text) == "SELECT ?s WHERE { ?s ?p ?o }"


def test_extract_prefix_anchor():
    text = "PREFIX ex: <http://e/>\nSELECT ?s WHERE { ?s ex:p ?o }"
    assert extract_sparql(text).startswith("PREFIX ex:")


def test_extract_failure():
    with pytest.raises(ExtractionError):
        extract_sparql("I am sorry, I cannot answer that.")


# -- the loop -------------------------------------------------------------------------

def make_generator(responses, description_store, ontology, max_attempts=3):
    client = embedded_client()
    load_mini_kg(client)
    return QueryGenerator(
        llm=ScriptedLlmGateway(responses),
        sparql=client,
        ontology_text=ontology.serialized_text,
        store=description_store,
        config=GenerationConfig(n_templates=2, max_attempts=max_attempts),
    )


def test_happy_path_single_attempt(description_store, ontology):
    generator = make_generator([f"```sparql\n{VALID_QUERY}\n```"], description_store, ontology)
    results, trace = generator.generate("What are the sensor values?")
    assert trace.outcome == "SUCCESS"
    assert len(trace.attempts) == 1
    assert trace.final_query == VALID_QUERY
    assert results.row_count == 6


def test_invalid_then_valid_converges_in_two(description_store, ontology):
    bad = "```sparql\nSELECT ?s WHERE { ?s ?p ?o\n```"
    good = f"```sparql\n{VALID_QUERY}\n```"
    generator = make_generator([bad, good], description_store, ontology)
    results, trace = generator.generate("What are the sensor values?")
    assert trace.outcome == "SUCCESS"
    assert len(trace.attempts) == 2
    assert trace.attempts[0].validation is not None
    assert "brace" in trace.attempts[0].validation
    assert trace.attempts[1].ok


def test_exhaustion_after_three_garbage_responses(description_store, ontology):
    generator = make_generator(["junk one", "junk two", "junk three"],
                               description_store, ontology)
    with pytest.raises(GenerationExhausted) as err:
        generator.generate("What are the sensor values?")
    trace = err.value.trace
    assert trace.outcome == "EXHAUSTED"
    assert len(trace.attempts) == 3
    assert all(a.validation is not None for a in trace.attempts)


def test_execution_error_feeds_repair_loop(description_store, ontology):
    # passes the local validator but the endpoint rejects the aggregation scope
    bad_exec = "```sparql\nSELECT ?s (COUNT(*) AS ?n) WHERE { ?s ?p ?o }\n```"
    good = f"```sparql\n{VALID_QUERY}\n```"
    generator = make_generator([bad_exec, good], description_store, ontology)
    results, trace = generator.generate("What are the sensor values?")
    assert trace.outcome == "SUCCESS"
    assert len(trace.attempts) == 2
    assert trace.attempts[0].validation is None
    assert trace.attempts[0].execution is not None


def test_repair_prompt_carries_previous_failure(description_store, ontology):
    seen_prompts = []

    class SpyGateway:
        def __init__(self):
            self.responses = ["garbage with no query", f"```sparql\n{VALID_QUERY}\n```"]
            self.i = 0

        def complete(self, prompt):
            seen_prompts.append(prompt)
            response = self.responses[self.i]
            self.i += 1
            return response

    client = embedded_client()
    load_mini_kg(client)
    generator = QueryGenerator(SpyGateway(), client, ontology.serialized_text,
                               store=description_store, config=GenerationConfig())
    generator.generate("What are the sensor values?")
    assert "Previous attempt failed" not in seen_prompts[0]
    assert "Previous attempt failed" in seen_prompts[1]
    assert "garbage with no query" in seen_prompts[1]


def test_zero_rows_counts_as_success(description_store, ontology):
    empty_query = ("PREFIX ioe: <http://example.org/ioe#>\n"
                   "SELECT ?s WHERE { ?s ioe:doesNotExist ?v }")
    generator = make_generator([f"```sparql\n{empty_query}\n```"], description_store, ontology)
    results, trace = generator.generate("anything bound to nothing?")
    assert trace.outcome == "SUCCESS"
    assert results.row_count == 0


def test_reproducible_end_to_end(description_store, ontology):
    script = [f"```sparql\n{VALID_QUERY}\n```"]
    first = make_generator(list(script), description_store, ontology).generate("sensor values?")
    second = make_generator(list(script), description_store, ontology).generate("sensor values?")
    assert first[0].to_json() == second[0].to_json()
    assert [a.query for a in first[1].attempts] == [a.query for a in second[1].attempts]


def test_attempts_never_exceed_max(description_store, ontology):
    generator = make_generator(["junk"] * 10, description_store, ontology, max_attempts=5)
    with pytest.raises(GenerationExhausted) as err:
        generator.generate("question")
    assert len(err.value.trace.attempts) == 5


def test_corpus_templates_all_validate_after_substitution(corpus):
    for template in corpus:
        assert validate_sparql(template.substituted()) is None, template.id


# -- gateways -----------------------------------------------------------------------

def test_scripted_gateway_replays_in_order():
    gw = ScriptedLlmGateway(["a", "b"])
    assert gw.complete("x") == "a"
    assert gw.complete("y") == "b"


def test_scripted_gateway_exhaustion():
    gw = ScriptedLlmGateway([])
    with pytest.raises(Exception):
        gw.complete("x")


def test_scripted_gateway_from_file(tmp_path):
    path = tmp_path / "replay.json"
    path.write_text('["one", "two"]')
    gw = ScriptedLlmGateway.from_file(path)
    assert gw.complete("p") == "one"


def test_http_gateway_round_trip():
    def handler(request):
        import json
        body = json.loads(request.content)
        assert body["model"] == "m1"
        assert body["messages"][0]["content"] == "hello"
        return httpx.Response(200, json={"text": "world"})

    gw = HttpLlmGateway("http://llm.example/v1", "m1",
                        transport=httpx.MockTransport(handler))
    assert gw.complete("hello") == "world"


def test_http_gateway_retries_twice_then_raises():
    calls = []

    def handler(request):
        calls.append(1)
        raise httpx.ConnectError("down", request=request)

    gw = HttpLlmGateway("http://llm.example/v1", "m1",
                        transport=httpx.MockTransport(handler))
    with pytest.raises(TransportError) as err:
        gw.complete("hello")
    assert len(calls) == 3  # initial try + 2 network retries
    assert err.value.retries == 2


def test_trace_json_shape():
    trace = GenerationTrace(attempts=[Attempt(query="q", validation="bad", duration=0.5)],
                            outcome="EXHAUSTED")
    doc = trace.to_json()
    assert doc["outcome"] == "EXHAUSTED"
    assert doc["attempts"][0]["query"] == "q"
    assert "duration" in doc["attempts"][0]
    assert "duration" not in trace.to_json(include_duration=False)["attempts"][0]
