#!/usr/bin/env python3
"""Render every prompt template with one shared slot set.

Run from the repository root:  python demos/03_prompt_gallery.py
"""

from pathlib import Path

from kqlforge.kql import SchemaCatalog
from kqlforge.prompts import (
    build_alternative,
    build_cot_rationale,
    build_nl2kql,
    build_oracle,
    build_synthesis,
    build_zero_shot,
)
from kqlforge.retrieval import OfflineHashEmbedder, build_table_store, build_value_store, refine_schema

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

NLQ = "List devices that talked to pastebin in the last day."
EXAMPLES = [("Count alerts by severity.", "AlertInfo | summarize Alerts = count() by Severity")]
CANDIDATES = [
    "DeviceNetworkEvents | where RemoteUrl has \"pastebin.com\" | take 20",
    "DeviceNetworkEvents | where RemoteUrl contains \"pastebin\"",
]

embedder = OfflineHashEmbedder()
schema = SchemaCatalog.load(FIXTURES / "defender_schema.json")
tables = build_table_store(schema, embedder)
values = build_value_store(schema, embedder)
schema_slice = refine_schema(NLQ, tables, values, embedder, t=2, v=2)

prompts = [
    build_zero_shot(NLQ),
    build_nl2kql(NLQ, schema_slice, EXAMPLES),
    build_alternative(NLQ, schema_slice, EXAMPLES, 1),
    build_alternative(NLQ, schema_slice, EXAMPLES, 2),
    build_oracle(NLQ, CANDIDATES, None),
    build_oracle(NLQ, CANDIDATES, schema_slice),
    build_synthesis("Detect", schema_slice, with_rationale=True, count=3),
    build_cot_rationale(NLQ, CANDIDATES[0]),
]

for prompt in prompts:
    print("=" * 72)
    print(f"template: {prompt.template_id}   (~{prompt.token_estimate} tokens)")
    print("=" * 72)
    print(prompt.rendered)
    print()
