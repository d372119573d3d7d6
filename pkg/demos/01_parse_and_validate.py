#!/usr/bin/env python3
"""Walk through the KQL analysis layer: tokenize, parse, validate, extract.

Run from the repository root:  python demos/01_parse_and_validate.py
"""

from pathlib import Path

from kqlforge.kql import (
    SchemaCatalog,
    analyze,
    extract_shape,
    parse,
    strip_model_decorations,
    tokenize,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

QUERY = """DeviceNetworkEvents
| where Timestamp >= ago(7d)
| where ActionType == 'ConnectionSuccess'
| summarize arg_max(Timestamp, LocalIP) by DeviceId
| where LocalIP == "89.12.55.1"
| project DeviceId"""

print("=== Tokens of the first line ===")
for token in tokenize("DeviceNetworkEvents | where Timestamp >= ago(7d)"):
    print(f"  {token.kind:20s} {token.text!r}")

print("\n=== Parsed pipeline ===")
query = parse(QUERY)
print("  sources:", ", ".join(query.sources))
print("  stages: ", " -> ".join(stage.kind for stage in query.stages))

print("\n=== Semantic validation against the Defender schema ===")
schema = SchemaCatalog.load(FIXTURES / "defender_schema.json")
_, diagnostics = analyze(QUERY, schema)
print("  diagnostics:", diagnostics or "none - the query is valid")

print("\n=== The same pipeline with a typo ===")
_, diagnostics = analyze(QUERY.replace("LocalIP ==", "LocalIp2 =="), schema)
for diag in diagnostics:
    print(f"  [{diag.severity}] {diag.message}")

print("\n=== Structural shape (for table/filter scoring) ===")
shape = extract_shape(query)
print("  tables:         ", sorted(shape.tables))
print("  filter columns: ", sorted(shape.filter_columns))
print("  filter literals:", sorted(shape.filter_literals))

print("\n=== Cleaning a raw model reply ===")
raw = "Here is the query:\n```kusto\nEmailEvents\n| take 5\n```\nThis limits output to 5 rows."
print("  cleaned:", strip_model_decorations(raw).replace("\n", " / "))
