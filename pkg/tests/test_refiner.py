from __future__ import annotations

import pytest

from conftest import LISTING_1

from kqlforge.kql import analyze
from kqlforge.pipeline import nearest_schema_name, query_refine
from kqlforge.retrieval import cosine


def diag_count(text, schema) -> int:
    _, diags = analyze(text, schema)
    return len(diags)


def test_valid_query_is_unchanged(schema, embedder):
    refined, repairs = query_refine(LISTING_1, schema, embedder)
    assert refined == LISTING_1
    assert repairs == []


def test_idempotent_on_all_gold_queries(schema, embedder, gold_queries):
    for gold in gold_queries:
        refined, repairs = query_refine(gold, schema, embedder)
        assert refined == gold
        assert repairs == []
        again, _ = query_refine(refined, schema, embedder)
        assert again == refined


def test_unbalanced_paren_repaired(schema, embedder):
    refined, repairs = query_refine("EmailEvents | where (AttachmentCount == 1", schema, embedder)
    query, diags = analyze(refined, schema)
    assert query is not None and diags == []
    assert any(r.kind == "balance-parens" for r in repairs)


def test_extra_closer_removed(schema, embedder):
    refined, repairs = query_refine("EmailEvents | where AttachmentCount == 1)", schema, embedder)
    query, diags = analyze(refined, schema)
    assert query is not None and diags == []
    assert any(r.kind == "balance-parens" for r in repairs)


def test_missing_pipe_inserted(schema, embedder):
    broken = "EmailEvents\nwhere ThreatTypes has \"Phish\"\n| take 5"
    refined, repairs = query_refine(broken, schema, embedder)
    query, diags = analyze(refined, schema)
    assert query is not None and diags == []
    assert any(r.kind == "insert-pipe" for r in repairs)


def test_fence_stripped(schema, embedder):
    refined, repairs = query_refine("```kusto\nEmailEvents | take 5\n```", schema, embedder)
    assert refined == "EmailEvents | take 5"
    assert any(r.kind == "strip-decorations" for r in repairs)


def test_identifier_repair_fires_at_threshold(schema, embedder):
    # Precomputed with the offline embedder: snake_case and CamelCase of the
    # same words embed identically, so the cosine is 1.0 >= 0.9.
    assert cosine(embedder.embed_one("Device_Name"), embedder.embed_one("DeviceName")) >= 0.9
    broken = "DeviceInfo | where Device_Name == \"srv01\""
    refined, repairs = query_refine(broken, schema, embedder, threshold=0.9)
    assert "DeviceName" in refined and "Device_Name" not in refined
    assert any(r.kind == "replace-identifier" for r in repairs)
    assert diag_count(refined, schema) == 0


def test_identifier_repair_held_below_threshold(schema, embedder):
    # Precomputed: cosine("Timestamp2", "Timestamp") ~= 0.577 < 0.9, so the
    # misspelling stays and its diagnostic is retained.
    score = cosine(embedder.embed_one("Timestamp2"), embedder.embed_one("Timestamp"))
    assert score < 0.9
    broken = "EmailEvents | where Timestamp2 >= ago(7d)"
    refined, repairs = query_refine(broken, schema, embedder, threshold=0.9)
    assert "Timestamp2" in refined
    assert not any(r.kind == "replace-identifier" for r in repairs)
    assert diag_count(refined, schema) >= 1


def test_nearest_schema_name_threshold_boundary(schema, embedder):
    names = schema.all_names()
    assert nearest_schema_name("Device_Name", names, embedder, 0.9) == "DeviceName"
    assert nearest_schema_name("Timestamp2", names, embedder, 0.9) is None
    # The same lookup succeeds once the threshold drops below the cosine.
    assert nearest_schema_name("Timestamp2", names, embedder, 0.5) == "Timestamp"


def _mutations(gold: str) -> list[str]:
    """Five deterministic corruptions per gold query."""
    lines = gold.splitlines()
    drop_paren = gold
    for i, line in enumerate(lines):
        if line.rstrip().endswith(")"):
            broken = list(lines)
            broken[i] = line.rstrip()[:-1]
            drop_paren = "\n".join(broken)
            break
    strip_pipe = gold
    for i, line in enumerate(lines):
        if line.startswith("| "):
            broken = list(lines)
            broken[i] = line[2:]
            strip_pipe = "\n".join(broken)
            break
    snake = gold
    for camel, snake_case in (
        ("DeviceName", "Device_Name"),
        ("AccountName", "Account_Name"),
        ("Timestamp", "Time_Stamp"),
    ):
        if camel in gold:
            snake = gold.replace(camel, snake_case, 1)
            break
    fenced = f"```kusto\n{gold}\n```"
    extra_closer = gold + ")"
    return [drop_paren, strip_pipe, snake, fenced, extra_closer]


def test_refine_never_increases_diagnostics_on_mutation_corpus(schema, embedder, gold_queries):
    corpus = [mutant for gold in gold_queries for mutant in _mutations(gold)]
    assert len(corpus) == 100
    for mutant in corpus:
        before = diag_count(mutant, schema)
        refined, _ = query_refine(mutant, schema, embedder)
        after = diag_count(refined, schema)
        assert after <= before, mutant


def test_refine_returns_best_effort_text_on_unfixable_input(schema, embedder):
    refined, _ = query_refine("completely unrelated prose with no query", schema, embedder)
    assert isinstance(refined, str) and refined
