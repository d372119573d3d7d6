from __future__ import annotations

import pytest

from kqlforge.errors import EmptySynthesisError
from kqlforge.gateway import MockBackend
from kqlforge.pipeline import parse_synthesis_reply, split_dataset, synthesize_fsdb

VALID_KQL = "EmailEvents\n| where ThreatTypes has \"Phish\"\n| take 5"
INVALID_KQL = "EmailEvents\n| where NoSuchColumn == 1"


def reply_with(pairs: list[tuple[str, str]]) -> str:
    blocks = [f"NLQ: {nlq}\nKQL:\n{kql}" for nlq, kql in pairs]
    return "\n---\n".join(blocks)


def test_fifty_fifty_mix_keeps_exactly_the_valid_half(schema):
    def responder(request):
        return reply_with([
            (f"valid question {request.request_tag}", VALID_KQL),
            (f"invalid question {request.request_tag}", INVALID_KQL),
        ])

    teacher = MockBackend(responder)
    result = synthesize_fsdb(
        schema, teacher, "gemini-2.0-flash", themes=("Detect", "Report"), pairs_per_theme=2
    )
    assert len(result.kept) == 2
    assert len(result.discarded) == 2
    for record in result.kept:
        assert record["kql"] == VALID_KQL
    for record in result.discarded:
        assert record["diagnostics"], "every discard carries its diagnostics"
        assert "NoSuchColumn" in record["diagnostics"][0]["message"]


def test_rationale_reply_split_on_kql_line(schema):
    reply = (
        "NLQ: show phishing emails\n"
        "EXPLANATION:\n"
        "Filter the email table to rows whose threat types include Phish.\n"
        "KQL:\n"
        f"{VALID_KQL}"
    )
    pairs = parse_synthesis_reply(reply, with_rationale=True)
    assert len(pairs) == 1
    assert pairs[0]["nlq"] == "show phishing emails"
    assert pairs[0]["rationale"].startswith("Filter the email table")
    assert pairs[0]["kql"] == VALID_KQL

    teacher = MockBackend(lambda request: reply)
    result = synthesize_fsdb(
        schema, teacher, "gemini-2.0-flash", themes=("Detect",), with_rationale=True
    )
    assert result.kept[0]["rationale"].startswith("Filter the email table")


def test_five_themes_partition_output(schema):
    teacher = MockBackend(lambda request: reply_with([("q " + request.request_tag, VALID_KQL)]))
    result = synthesize_fsdb(schema, teacher, "gemini-2.0-flash", pairs_per_theme=1)
    themes = [record["theme"] for record in result.kept]
    assert themes == ["Explore", "Expansion", "Detect", "Remediate", "Report"]


def test_teacher_failure_is_skipped_not_fatal(schema):
    calls = {"n": 0}

    def responder(request):
        calls["n"] += 1
        if calls["n"] == 1:
            raise RuntimeError("teacher outage")
        return reply_with([("q", VALID_KQL)])

    teacher = MockBackend(responder)
    result = synthesize_fsdb(schema, teacher, "gemini-2.0-flash", themes=("Detect", "Report"))
    assert len(result.kept) == 1


def test_zero_valid_pairs_is_an_error(schema):
    teacher = MockBackend(lambda request: reply_with([("q", INVALID_KQL)]))
    with pytest.raises(EmptySynthesisError):
        synthesize_fsdb(schema, teacher, "gemini-2.0-flash", themes=("Detect",))


def test_malformed_blocks_are_ignored(schema):
    reply = "some preamble without markers\n---\nNLQ: good\nKQL:\n" + VALID_KQL
    pairs = parse_synthesis_reply(reply, with_rationale=False)
    assert len(pairs) == 1


def test_split_sizes_800_200():
    examples = [{"i": i} for i in range(1000)]
    train, validation = split_dataset(examples, train_fraction=0.8, seed=4)
    assert (len(train), len(validation)) == (800, 200)


def test_split_deterministic_for_seed():
    examples = list(range(100))
    assert split_dataset(examples, 0.8, seed=7) == split_dataset(examples, 0.8, seed=7)
    assert split_dataset(examples, 0.8, seed=7) != split_dataset(examples, 0.8, seed=8)


def test_split_disjoint_union():
    examples = list(range(10))
    train, validation = split_dataset(examples, 0.5, seed=1)
    assert (len(train), len(validation)) == (5, 5)
    assert sorted(train + validation) == examples
    assert set(train).isdisjoint(validation)


def test_split_requires_two_examples():
    with pytest.raises(ValueError):
        split_dataset([1], 0.8, seed=0)
    with pytest.raises(ValueError):
        split_dataset(list(range(10)), 1.5, seed=0)
