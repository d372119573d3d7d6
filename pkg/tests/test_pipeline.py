from __future__ import annotations

import pytest

from conftest import FIXTURES

from kqlforge.errors import UnrecordedRequestError
from kqlforge.gateway import MockBackend, ReplayBackend, echo_backend
from kqlforge.kql import analyze
from kqlforge.pipeline import Backends, PipelineConfig, translate


@pytest.fixture(scope="module")
def replay_backends():
    backend = ReplayBackend(FIXTURES / "replay_two_stage.jsonl")
    return Backends(generator=backend, oracle=backend)


def test_zero_shot_single_completion(schema, stores, embedder):
    backend = MockBackend(["EmailEvents | take 5"])
    config = PipelineConfig(mode="zero_shot")
    final, trace = translate("show me five emails", config, stores, schema, Backends(backend))
    assert final == "EmailEvents | take 5"
    assert len(trace.usage) == 1
    assert trace.prompts[0].template_id == "zero_shot"
    assert trace.stage_seconds["generate"] == 0.0


def test_nl2kql_flow(schema, stores, embedder, dataset):
    config = PipelineConfig(mode="nl2kql")
    backend = echo_backend(dataset)
    pair = dataset[0]
    final, trace = translate(pair["nlq"], config, stores, schema, Backends(backend))
    assert final == pair["kql"]
    assert len(trace.schema_tables) == 9  # nl2kql default t
    assert len(trace.few_shots) <= 2
    assert trace.prompts[0].template_id == "nl2kql"
    assert trace.diagnostics_after == []


def test_nl2kql_t5_slice_has_exactly_five_tables(schema, stores, dataset):
    config = PipelineConfig(mode="nl2kql", t=5)
    backend = echo_backend(dataset)
    _, trace = translate(dataset[0]["nlq"], config, stores, schema, Backends(backend))
    assert len(trace.schema_tables) == 5


def test_two_stage_default_slice_is_five_tables_no_values(schema, stores, dataset):
    config = PipelineConfig(mode="two_stage")
    backend = echo_backend(dataset)
    _, trace = translate(dataset[0]["nlq"], config, stores, schema, Backends(backend, backend))
    assert len(trace.schema_tables) == 5
    # Values are omitted in two-stage mode, so the main prompt carries none.
    assert "EmailEvents.ThreatTypes = Phish" not in trace.prompts[0].rendered


def test_two_stage_prompt_variants(schema, stores, dataset):
    for variant, template_id in (("original", "nl2kql"), ("alt1", "alt1"), ("alt2", "alt2")):
        config = PipelineConfig(mode="two_stage", prompt_variant=variant)
        backend = echo_backend(dataset)
        _, trace = translate(dataset[0]["nlq"], config, stores, schema, Backends(backend, backend))
        assert trace.prompts[0].template_id == template_id
        assert trace.prompts[1].template_id == "oracle_schema"


def test_two_stage_general_oracle_mode(schema, stores, dataset):
    config = PipelineConfig(mode="two_stage", oracle_mode="general")
    backend = echo_backend(dataset)
    _, trace = translate(dataset[0]["nlq"], config, stores, schema, Backends(backend, backend))
    assert trace.prompts[1].template_id == "oracle_general"


def test_two_stage_replay_matches_fixture(schema, stores, dataset, replay_backends):
    config = PipelineConfig()
    pair = dataset[0]
    final, trace = translate(pair["nlq"], config, stores, schema, replay_backends)
    assert final == pair["kql"]
    assert trace.stage_seconds == {"generate": 1.8, "oracle": 0.6}
    assert trace.latency_seconds() == pytest.approx(2.4)


def test_two_stage_candidate_fanout(schema, stores, dataset, replay_backends):
    config = PipelineConfig(n_candidates=3, generator_temperature=0.7)
    final, trace = translate(dataset[0]["nlq"], config, stores, schema, replay_backends)
    assert len(trace.raw_candidates) == 3
    generator_calls = [u for u in trace.usage if u.request_tag.startswith("generator")]
    assert len(generator_calls) == 3
    assert final == dataset[0]["kql"]


def test_oracle_fallback_on_empty_reply(schema, stores, dataset):
    pair = dataset[0]
    generator = echo_backend([pair])
    oracle = MockBackend([""])
    config = PipelineConfig(mode="two_stage")
    final, trace = translate(pair["nlq"], config, stores, schema, Backends(generator, oracle))
    assert trace.oracle_fallback
    assert final == pair["kql"]  # highest-ranked candidate is the echoed gold


def test_residual_syntax_failure_triggers_refine(schema, stores, dataset):
    pair = dataset[0]
    generator = echo_backend([pair])
    broken_oracle = MockBackend([pair["kql"].replace("ago(7d)", "ago(7d")])
    config = PipelineConfig(mode="two_stage")
    final, trace = translate(pair["nlq"], config, stores, schema, Backends(generator, broken_oracle))
    assert any(d.severity == "syntax" for d in trace.diagnostics_before)
    assert trace.repairs
    query, diags = analyze(final, schema)
    assert query is not None and diags == []


def test_trace_completeness(schema, stores, dataset, replay_backends):
    config = PipelineConfig(n_candidates=2, generator_temperature=0.2)
    _, trace = translate(dataset[1]["nlq"], config, stores, schema, replay_backends)
    tags = [u.request_tag for u in trace.usage]
    assert tags == ["generator:0", "generator:1", "oracle"]
    assert trace.final_kql
    data = trace.to_json_dict()
    assert data["nlq"] == dataset[1]["nlq"]
    assert len(data["usage"]) == 3


def test_replay_is_deterministic(schema, stores, dataset, replay_backends):
    config = PipelineConfig()
    pair = dataset[2]
    first = translate(pair["nlq"], config, stores, schema, replay_backends)
    second = translate(pair["nlq"], config, stores, schema, replay_backends)
    assert first[0] == second[0]
    assert first[1].to_json_dict() == second[1].to_json_dict()


def test_replay_miss_propagates_with_trace_attached(schema, stores, replay_backends):
    config = PipelineConfig()
    with pytest.raises(UnrecordedRequestError) as err:
        translate("an NLQ that was never recorded", config, stores, schema, replay_backends)
    trace = err.value.trace
    assert trace.nlq == "an NLQ that was never recorded"
    assert trace.error is not None
    assert len(trace.schema_tables) == 5  # retrieval ran before the miss


def test_unparseable_final_output_is_returned_with_diagnostics(schema, stores, dataset):
    pair = dataset[0]
    generator = MockBackend(["this is not a query at all ("])
    oracle = MockBackend(["still not a query ("])
    config = PipelineConfig(mode="two_stage")
    final, trace = translate(pair["nlq"], config, stores, schema, Backends(generator, oracle))
    assert final
    assert trace.diagnostics_after
