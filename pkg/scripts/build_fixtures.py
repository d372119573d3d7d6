#!/usr/bin/env python3
"""Regenerate the committed fixtures: embedding stores, the two-stage
replay fixture (default config plus the full sweep grid), and the golden
prompt renderings.

Run from the repository root:

    python scripts/build_fixtures.py
"""

from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from kqlforge.evaluation import evaluate_dataset, run_sweep
from kqlforge.gateway import MockBackend, RecordingBackend
from kqlforge.kql import SchemaCatalog
from kqlforge.pipeline import Backends, PipelineConfig, Stores, load_dataset
from kqlforge.prompts import (
    build_alternative,
    build_cot_rationale,
    build_nl2kql,
    build_oracle,
    build_synthesis,
    build_zero_shot,
)
from kqlforge.retrieval import (
    OfflineHashEmbedder,
    build_example_store,
    build_table_store,
    build_value_store,
    refine_schema,
)

FIXTURES = ROOT / "fixtures"
GOLDEN_DIR = ROOT / "tests" / "data" / "golden_prompts"


def build_stores(schema, embedder):
    stores_dir = FIXTURES / "stores"
    stores_dir.mkdir(parents=True, exist_ok=True)
    tables = build_table_store(schema, embedder)
    values = build_value_store(schema, embedder)
    fsdb = build_example_store(load_dataset(FIXTURES / "fsdb_examples.jsonl"), embedder)
    tables.save(stores_dir / "tables.ejsonl")
    values.save(stores_dir / "values.ejsonl")
    fsdb.save(stores_dir / "fsdb.ejsonl")
    print(f"stores: {len(tables)} tables, {len(values)} values, {len(fsdb)} examples")
    return Stores(tables=tables, values=values, fsdb=fsdb)


def _decorate_candidate(index: int, gold: str) -> str:
    """Plausible SLM outputs: fenced, prose-wrapped, misspelled, or broken."""
    style = index % 5
    if style == 0:
        return gold
    if style == 1:
        return f"```kusto\n{gold}\n```"
    if style == 2:
        return (
            "Here is the query you asked for:\n\n"
            f"```\n{gold}\n```\n\n"
            "This query filters the relevant table and projects the columns you need."
        )
    if style == 3:
        broken = gold
        for camel, snake in (("DeviceName", "Device_Name"), ("AccountName", "Account_Name")):
            if camel in broken:
                broken = broken.replace(camel, snake, 1)
                break
        return f"```kql\n{broken}\n```"
    return _drop_last_close_paren(gold)


def _drop_last_close_paren(gold: str) -> str:
    lines = gold.splitlines()
    for i, line in enumerate(lines):
        if line.rstrip().endswith(")"):
            lines[i] = line.rstrip()[:-1]
            break
    return "\n".join(lines)


def make_responder(dataset):
    ordered = sorted(dataset, key=lambda p: len(p["nlq"]), reverse=True)

    def lookup(prompt: str):
        for index, pair in enumerate(dataset):
            if pair["nlq"] in prompt:
                return index, pair
        raise AssertionError("no dataset NLQ found in prompt")

    def generator(request):
        index, pair = lookup(request.prompt)
        return _decorate_candidate(index, pair["kql"])

    def oracle(request):
        index, pair = lookup(request.prompt)
        if index == 13:
            return ""  # refusal; exercises the best-candidate fallback
        if index % 5 == 4:
            return _drop_last_close_paren(pair["kql"])  # exercises the refine pass
        if index % 2 == 0:
            return f"```kusto\n{pair['kql']}\n```"
        return pair["kql"]

    del ordered
    return generator, oracle


def build_replay_fixture(schema, stores, dataset):
    path = FIXTURES / "replay_two_stage.jsonl"
    if path.exists():
        path.unlink()
    generator_fn, oracle_fn = make_responder(dataset)
    generator = RecordingBackend(MockBackend(generator_fn, latency_seconds=1.8), path)
    oracle = RecordingBackend(MockBackend(oracle_fn, latency_seconds=0.6), path)
    backends = Backends(generator=generator, oracle=oracle)

    config = PipelineConfig()  # two_stage defaults: t=5, f=2, n=1, temperature=1
    report = evaluate_dataset(dataset, config, stores, schema, backends)
    print(f"default config capture: syntax={report.summary['syntax']:.3f} "
          f"semantic={report.summary['semantic']:.3f}")

    grids = [
        # The table-count sweep at the default temperature, then the full
        # candidate-count x temperature x table-count grid.
        {"t": [1, 3, 5, 7, 9]},
        {
            "n_candidates": [1, 2, 3, 4],
            "temperature": [0.2, 0.7, 1.2, 1.7],
            "t": [1, 3, 5, 7, 9],
        },
    ]
    for grid in grids:
        points = run_sweep(grid, config, dataset, stores, schema, backends)
        failures = [p for p in points if p.error or p.report.summary.get("failures")]
        print(f"sweep capture {sorted(grid)}: {len(points)} points, {len(failures)} failures")
    print(f"replay fixture -> {path} ({sum(1 for _ in open(path))} lines)")


def write_goldens(schema, stores, embedder):
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    nlq = "List phishing emails that were delivered in the last week."
    schema_slice = refine_schema(nlq, stores.tables, stores.values, embedder, t=2, v=2, include_values=True)
    examples = [
        ("Report weekly alert volume by severity.",
         "AlertInfo\n| where Timestamp >= ago(7d)\n| summarize Alerts = count() by Severity"),
        ("List the ten most recent network connections.",
         "DeviceNetworkEvents\n| sort by Timestamp desc\n| take 10"),
    ]
    candidates = [
        "EmailEvents\n| where ThreatTypes has \"Phish\"\n| take 10",
        "EmailEvents\n| where Subject contains \"phish\"",
    ]
    goldens = {
        "zero_shot": build_zero_shot(nlq),
        "nl2kql": build_nl2kql(nlq, schema_slice, examples),
        "alt1": build_alternative(nlq, schema_slice, examples, 1),
        "alt2": build_alternative(nlq, schema_slice, examples, 2),
        "oracle_general": build_oracle(nlq, candidates, None),
        "oracle_schema": build_oracle(nlq, candidates, schema_slice),
        "fsdb_synth": build_synthesis("Detect", schema_slice, with_rationale=False, count=4),
        "cot_rationale": build_cot_rationale(nlq, candidates[0]),
    }
    for template_id, prompt in goldens.items():
        (GOLDEN_DIR / f"{template_id}.golden.txt").write_text(prompt.rendered + "\n", encoding="utf-8")
    print(f"goldens -> {GOLDEN_DIR} ({len(goldens)} files)")


def main():
    embedder = OfflineHashEmbedder()
    schema = SchemaCatalog.load(FIXTURES / "defender_schema.json")
    dataset = load_dataset(FIXTURES / "defender_eval_20.jsonl")
    stores = build_stores(schema, embedder)
    build_replay_fixture(schema, stores, dataset)
    write_goldens(schema, stores, embedder)


if __name__ == "__main__":
    main()
