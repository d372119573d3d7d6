from __future__ import annotations

import pytest

from kqlforge.kql.diagnostics import Diagnostic
from kqlforge.kql.lexer import (
    DATETIME,
    FENCE,
    IDENTIFIER,
    KEYWORD,
    NUMBER,
    STRING,
    TIMESPAN,
    datetime_payload,
    tokenize,
)


def test_hand_tokenized_pipeline_head():
    # Hand-derived against the lexer rules: ident, pipe, keyword, ident,
    # operator, ident, punct, timespan, punct.
    tokens = tokenize("DeviceNetworkEvents | where Timestamp >= ago(7d)")
    assert isinstance(tokens, list)
    assert len(tokens) == 9
    assert tokens[-1].text == ")"
    assert [t.kind for t in tokens[:3]] == [IDENTIFIER, "pipe", KEYWORD]
    assert tokens[7].kind == TIMESPAN and tokens[7].text == "7d"


def test_empty_input_yields_empty_stream():
    assert tokenize("") == []


def test_unterminated_string_is_missing_quote():
    result = tokenize('| where x == "abc')
    assert isinstance(result, Diagnostic)
    assert result.severity == "syntax"
    assert result.message == 'Missing: "'


@pytest.mark.parametrize("text", ["7d", "24h", "90m", "30s", "500ms"])
def test_timespan_literals(text):
    tokens = tokenize(text)
    assert [t.kind for t in tokens] == [TIMESPAN]


def test_digits_with_non_unit_suffix_split():
    tokens = tokenize("7days")
    assert [t.kind for t in tokens] == [NUMBER, IDENTIFIER]


def test_backtick_fences_become_residue_tokens():
    tokens = tokenize("```kusto\nT | take 1\n```")
    assert tokens[0].kind == FENCE
    assert tokens[0].text == "```"
    assert tokens[-1].kind == FENCE


def test_datetime_literal_spans_whole_call():
    tokens = tokenize('datetime(" 2022-10-05T20:54:33Z")')
    assert len(tokens) == 1
    assert tokens[0].kind == DATETIME
    assert datetime_payload(tokens[0].text) == "2022-10-05T20:54:33Z"


def test_datetime_unquoted_payload():
    tokens = tokenize("datetime(2022-10-05 20:54:33)")
    assert tokens[0].kind == DATETIME
    assert datetime_payload(tokens[0].text) == "2022-10-05 20:54:33"


def test_negated_and_tilde_operators():
    tokens = tokenize('x !contains "a" and y in~ ("b")')
    texts = [t.text for t in tokens]
    assert "!contains" in texts
    assert "in~" in texts


def test_stray_backslash_is_canonical():
    result = tokenize("T | where x == \\bad")
    assert isinstance(result, Diagnostic)
    assert result.message == "Unexpected: \\"


def test_single_quoted_string():
    tokens = tokenize("'ConnectionSuccess'")
    assert [t.kind for t in tokens] == [STRING]


def test_round_trip_reconstruction(gold_queries):
    # Token texts plus the whitespace between spans rebuild each source.
    for source in gold_queries:
        tokens = tokenize(source)
        assert isinstance(tokens, list)
        rebuilt = []
        cursor = 0
        for token in tokens:
            start, end = token.span
            gap = source[cursor:start]
            assert gap.strip() == "", f"non-whitespace gap {gap!r} in {source!r}"
            rebuilt.append(gap)
            assert source[start:end] == token.text
            rebuilt.append(token.text)
            cursor = end
        rebuilt.append(source[cursor:])
        assert "".join(rebuilt) == source
