"""Prompt templates and deterministic builders."""

from .forge import (
    PromptInstance,
    SYNTHESIS_THEMES,
    TEMPLATE_IDS,
    build_alternative,
    build_cot_rationale,
    build_nl2kql,
    build_oracle,
    build_synthesis,
    build_zero_shot,
    estimate_tokens,
    load_template,
    render_candidates,
    render_examples,
)

__all__ = [
    "PromptInstance",
    "SYNTHESIS_THEMES",
    "TEMPLATE_IDS",
    "build_alternative",
    "build_cot_rationale",
    "build_nl2kql",
    "build_oracle",
    "build_synthesis",
    "build_zero_shot",
    "estimate_tokens",
    "load_template",
    "render_candidates",
    "render_examples",
]
