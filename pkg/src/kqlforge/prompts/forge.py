"""Deterministic prompt construction from editable template files."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..retrieval.catalog import SchemaSlice

TEMPLATE_DIR = Path(__file__).parent / "templates"

TEMPLATE_IDS = (
    "zero_shot",
    "nl2kql",
    "alt1",
    "alt2",
    "oracle_general",
    "oracle_schema",
    "fsdb_synth",
    "cot_rationale",
)

SYNTHESIS_THEMES = ("Explore", "Expansion", "Detect", "Remediate", "Report")

_PLACEHOLDER = re.compile(
    r"\{(NLQ|SCHEMA|VALUES|EXAMPLES|CANDIDATES|KQL|THEME|COUNT|FORMAT_RULES)\}"
)
_TOKEN_CHUNK = re.compile(r"\w+|[^\w\s]")

_FORMAT_RULES_PLAIN = """Format each pair exactly as:
NLQ: <the analyst question>
KQL:
<the query>"""

_FORMAT_RULES_RATIONALE = """Before each query, add a brief explanation of how it answers the question. Format each pair exactly as:
NLQ: <the analyst question>
EXPLANATION:
<a brief explanation>
KQL:
<the query>"""


@dataclass(frozen=True)
class PromptInstance:
    """A fully rendered prompt plus the structured record of what went in."""

    template_id: str
    rendered: str
    slots: dict = field(default_factory=dict)
    token_estimate: int = 0


def estimate_tokens(text: str) -> int:
    """Rough token count: word-and-punctuation chunks times 1.3.

    Used for cost projection only; authoritative counts come from model
    backends.
    """
    return math.ceil(len(_TOKEN_CHUNK.findall(text)) * 1.3)


def load_template(template_id: str) -> str:
    if template_id not in TEMPLATE_IDS:
        raise ValueError(f"unknown template id {template_id!r}")
    return (TEMPLATE_DIR / f"{template_id}.txt").read_text(encoding="utf-8")


def _render(template_id: str, slots: dict[str, str]) -> PromptInstance:
    text = load_template(template_id)
    for slot, value in slots.items():
        text = text.replace("{" + slot + "}", value)
    leftover = _PLACEHOLDER.search(text)
    if leftover:
        raise ValueError(
            f"template {template_id!r} left placeholder {leftover.group(0)} unresolved"
        )
    text = text.rstrip("\n")
    return PromptInstance(
        template_id=template_id,
        rendered=text,
        slots=dict(slots),
        token_estimate=estimate_tokens(text),
    )


def render_examples(examples: list[tuple[str, str]]) -> str:
    blocks = [f"NLQ: {nlq}\nKQL:\n{kql}" for nlq, kql in examples]
    return "\n\n".join(blocks)


def render_candidates(candidates: list[str]) -> str:
    return "\n\n".join(f"{i}.\n{text}" for i, text in enumerate(candidates, start=1))


def build_zero_shot(nlq: str) -> PromptInstance:
    if not nlq:
        raise ValueError("nlq must be non-empty")
    return _render("zero_shot", {"NLQ": nlq})


def build_nl2kql(
    nlq: str, schema_slice: SchemaSlice, examples: list[tuple[str, str]]
) -> PromptInstance:
    if not schema_slice.tables:
        raise ValueError("schema slice must contain at least one table")
    return _render(
        "nl2kql",
        {
            "NLQ": nlq,
            "SCHEMA": schema_slice.render_tables(),
            "VALUES": schema_slice.render_values(),
            "EXAMPLES": render_examples(examples),
        },
    )


def build_alternative(
    nlq: str,
    schema_slice: SchemaSlice,
    examples: list[tuple[str, str]],
    variant: int,
) -> PromptInstance:
    if variant not in (1, 2):
        raise ValueError(f"variant must be 1 or 2, got {variant!r}")
    if not schema_slice.tables:
        raise ValueError("schema slice must contain at least one table")
    return _render(
        f"alt{variant}",
        {
            "NLQ": nlq,
            "SCHEMA": schema_slice.render_tables(),
            "VALUES": schema_slice.render_values(),
            "EXAMPLES": render_examples(examples),
        },
    )


def build_oracle(
    nlq: str, candidates: list[str], schema_slice: SchemaSlice | None = None
) -> PromptInstance:
    if not candidates:
        raise ValueError("candidates must be non-empty")
    slots = {"NLQ": nlq, "CANDIDATES": render_candidates(candidates)}
    if schema_slice is None:
        return _render("oracle_general", slots)
    slots["SCHEMA"] = schema_slice.render_tables()
    return _render("oracle_schema", slots)


def build_synthesis(
    theme: str,
    table_subset: SchemaSlice,
    with_rationale: bool = False,
    count: int = 5,
) -> PromptInstance:
    if theme not in SYNTHESIS_THEMES:
        raise ValueError(f"unknown theme {theme!r}; expected one of {SYNTHESIS_THEMES}")
    return _render(
        "fsdb_synth",
        {
            "THEME": theme,
            "COUNT": str(count),
            "SCHEMA": table_subset.render_tables(),
            "FORMAT_RULES": _FORMAT_RULES_RATIONALE if with_rationale else _FORMAT_RULES_PLAIN,
        },
    )


def build_cot_rationale(nlq: str, kql: str) -> PromptInstance:
    if not nlq or not kql:
        raise ValueError("nlq and kql must be non-empty")
    return _render("cot_rationale", {"NLQ": nlq, "KQL": kql})
