#!/usr/bin/env python3
"""Build the semantic data catalog and run schema refinement plus few-shot
selection for one natural-language query.

Run from the repository root:  python demos/02_semantic_catalog_retrieval.py
"""

from pathlib import Path

from kqlforge.kql import SchemaCatalog
from kqlforge.pipeline import load_dataset
from kqlforge.retrieval import (
    OfflineHashEmbedder,
    build_example_store,
    build_table_store,
    build_value_store,
    refine_schema,
    select_few_shots,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

NLQ = "Which senders delivered phishing emails to our analysts this week?"

embedder = OfflineHashEmbedder()
schema = SchemaCatalog.load(FIXTURES / "defender_schema.json")

tables = build_table_store(schema, embedder)
values = build_value_store(schema, embedder)
fsdb = build_example_store(load_dataset(FIXTURES / "fsdb_examples.jsonl"), embedder)
print(f"catalog: {len(tables)} tables, {len(values)} values, {len(fsdb)} examples")

print(f"\nNLQ: {NLQ}")
print("\n=== Top-3 tables with top-2 values each ===")
schema_slice = refine_schema(NLQ, tables, values, embedder, t=3, v=2, include_values=True)
print(schema_slice.render_tables())
print("\nvalues:")
print(schema_slice.render_values() or "  (none)")

print("\n=== Few-shot selection restricted to those tables ===")
selection = select_few_shots(NLQ, fsdb, schema_slice.table_names(), embedder, f=2)
print("fallback used:", selection.used_fallback)
for nlq, kql in selection.examples:
    print(f"\n  NLQ: {nlq}")
    print("  KQL:", kql.replace("\n", "\n       "))
