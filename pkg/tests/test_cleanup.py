from __future__ import annotations

import pytest

from kqlforge.kql import strip_model_decorations


def test_fence_removal():
    assert strip_model_decorations("```kusto\nEmailEvents | take 5\n```") == "EmailEvents | take 5"


def test_idempotence_on_clean_query():
    assert strip_model_decorations("EmailEvents | take 5") == "EmailEvents | take 5"


def test_prose_and_fences_and_trailing_explanation():
    # Fixture built from a recorded model reply.
    raw = (
        "Here is the query:\n"
        "```\n"
        "EmailEvents\n"
        "| take 5\n"
        "```\n"
        "This query limits the result to five rows."
    )
    assert strip_model_decorations(raw) == "EmailEvents\n| take 5"


def test_prose_without_fences():
    raw = (
        "Sure, here you go.\n\n"
        "DeviceProcessEvents\n"
        "| where FileName == \"cmd.exe\"\n"
        "| take 10\n\n"
        "Let me know if you need anything else."
    )
    assert strip_model_decorations(raw) == (
        "DeviceProcessEvents\n| where FileName == \"cmd.exe\"\n| take 10"
    )


def test_language_tagged_fences():
    for tag in ("kusto", "kql", ""):
        raw = f"```{tag}\nAlertInfo | count\n```"
        assert strip_model_decorations(raw) == "AlertInfo | count"


def test_unclosed_fence():
    assert strip_model_decorations("```kusto\nAlertInfo | count") == "AlertInfo | count"


def test_no_query_content_returns_trimmed_input():
    raw = "  I cannot help with that request.  "
    assert strip_model_decorations(raw) == "I cannot help with that request."


def test_idempotence_property(gold_queries):
    for gold in gold_queries:
        once = strip_model_decorations(gold)
        assert strip_model_decorations(once) == once
        fenced = f"```kusto\n{gold}\n```"
        assert strip_model_decorations(fenced) == gold
        assert strip_model_decorations(strip_model_decorations(fenced)) == gold


@pytest.mark.parametrize("empty", ["", "   ", "\n\n"])
def test_empty_inputs(empty):
    assert strip_model_decorations(empty) == ""
