#!/usr/bin/env python3
"""Run the two-stage pipeline end to end with scripted backends: a noisy
candidate generator and an oracle whose reply still needs one repair pass.

Run from the repository root:  python demos/04_two_stage_translation.py
"""

from pathlib import Path

from kqlforge.gateway import MockBackend
from kqlforge.kql import SchemaCatalog
from kqlforge.pipeline import Backends, PipelineConfig, Stores, translate
from kqlforge.retrieval import EmbeddingStore

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

NLQ = "Which accounts had more than five failed logons in the last day?"

GOLD = """DeviceLogonEvents
| where Timestamp > ago(1d)
| where ActionType == "LogonFailed"
| summarize FailedCount = count() by AccountName
| where FailedCount > 5"""

# The generator wraps its answer in markdown and snake_cases a column; the
# oracle picks it but drops a closing parenthesis, so the final validation
# pass has something real to fix.
generator = MockBackend([f"Here is a query.\n```kusto\n{GOLD.replace('AccountName', 'Account_Name')}\n```"])
oracle = MockBackend([GOLD.replace("ago(1d)", "ago(1d")])

schema = SchemaCatalog.load(FIXTURES / "defender_schema.json")
stores = Stores(
    tables=EmbeddingStore.load(FIXTURES / "stores" / "tables.ejsonl"),
    values=None,
    fsdb=EmbeddingStore.load(FIXTURES / "stores" / "fsdb.ejsonl"),
)

config = PipelineConfig(mode="two_stage")  # t=5, f=2, n=1, temperature=1
final, trace = translate(NLQ, config, stores, schema, Backends(generator, oracle))

print("NLQ:", NLQ)
print("\nschema slice tables:", ", ".join(trace.schema_tables))
print("few-shot examples:", len(trace.few_shots), "(fallback)" if trace.few_shot_fallback else "")
print("\nraw candidate:")
print(trace.raw_candidates[0])
print("\noracle reply (note the unbalanced paren):")
print(trace.oracle_raw)
print("\nrepairs applied:", [f"{r.kind}: {r.before!r} -> {r.after!r}" for r in trace.repairs])
print("\nfinal KQL:")
print(final)
print("\ndiagnostics after refinement:", trace.diagnostics_after or "none")
print(f"latency (reporting rule): {trace.latency_seconds():.2f}s")
