#!/usr/bin/env python3
"""Evaluate the 20-pair dataset against the recorded replay fixture, then
sweep the table-count knob and compare summaries.

Run from the repository root:  python demos/05_evaluate_and_sweep.py
"""

from pathlib import Path

from kqlforge.evaluation import evaluate_dataset, run_sweep
from kqlforge.gateway import ReplayBackend
from kqlforge.kql import SchemaCatalog
from kqlforge.pipeline import Backends, PipelineConfig, Stores, load_dataset
from kqlforge.retrieval import EmbeddingStore

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

schema = SchemaCatalog.load(FIXTURES / "defender_schema.json")
dataset = load_dataset(FIXTURES / "defender_eval_20.jsonl")
stores = Stores(
    tables=EmbeddingStore.load(FIXTURES / "stores" / "tables.ejsonl"),
    values=EmbeddingStore.load(FIXTURES / "stores" / "values.ejsonl"),
    fsdb=EmbeddingStore.load(FIXTURES / "stores" / "fsdb.ejsonl"),
)
backend = ReplayBackend(FIXTURES / "replay_two_stage.jsonl")
backends = Backends(generator=backend, oracle=backend)

print("=== Two-stage evaluation over the replay fixture ===")
report = evaluate_dataset(dataset, PipelineConfig(), stores, schema, backends)
print(report.to_text_table())

print("=== Sweeping the top-t tables knob ===")
points = run_sweep({"t": [1, 3, 5, 7, 9]}, PipelineConfig(), dataset, stores, schema, backends)
print(f"{'tag':8s} {'syntax':>7s} {'semantic':>9s} {'latency':>8s} {'cost':>9s}")
for point in points:
    summary = point.report.summary
    print(
        f"{point.tag:8s} {summary['syntax']:7.3f} {summary['semantic']:9.3f} "
        f"{summary['mean_latency_s']:8.3f} ${summary['total_cost_usd']:8.4f}"
    )
